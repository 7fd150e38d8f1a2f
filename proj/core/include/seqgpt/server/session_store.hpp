#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "seqgpt/dialogue/session.hpp"
#include "seqgpt/llm/backends.hpp"

namespace seqgpt::server {

class UnknownSession : public Error {
 public:
  explicit UnknownSession(const std::string& id) : Error("UNKNOWN_SESSION", "unknown session: " + id) {}
};

class SessionBusy : public Error {
 public:
  explicit SessionBusy(const std::string& id)
      : Error("SESSION_BUSY", "a message for session " + id + " is already being processed") {}
};

/// A session plus the backends it owns (budgets are per session).
struct SessionSlot {
  dialogue::Session session;
  llm::BackendRegistry backends;
};

namespace detail {
struct SessionEntry;
}

/// Exclusive access to one session while a message is processed. The
/// session is replaced only through commit().
class SessionLease {
 public:
  SessionLease(std::shared_ptr<detail::SessionEntry> entry, std::function<void()> release);
  SessionLease(SessionLease&& other) noexcept;
  SessionLease& operator=(SessionLease&&) = delete;
  ~SessionLease();

  const dialogue::Session& session() const noexcept;
  const llm::BackendRegistry& backends() const noexcept;
  void commit(dialogue::Session session);

 private:
  std::shared_ptr<detail::SessionEntry> entry_;
  std::function<void()> release_;
};

/// Storage seam; a disk-backed store would implement the same calls.
class SessionRepository {
 public:
  virtual ~SessionRepository() = default;
  virtual void put(SessionSlot slot) = 0;
  /// Throws UnknownSession, or SessionBusy while another lease is alive.
  virtual SessionLease acquire(const std::string& id) = 0;
  /// Copy of the session for read-only use.
  virtual dialogue::Session snapshot(const std::string& id) = 0;
  virtual std::size_t size() = 0;
};

/// In-memory store with idle-TTL eviction (checked on every call).
class InMemorySessionStore final : public SessionRepository {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  explicit InMemorySessionStore(std::chrono::milliseconds ttl = std::chrono::hours(1), Clock clock = {});

  void put(SessionSlot slot) override;
  SessionLease acquire(const std::string& id) override;
  dialogue::Session snapshot(const std::string& id) override;
  std::size_t size() override;

 private:
  std::chrono::steady_clock::time_point now() const;
  void evict_locked(std::chrono::steady_clock::time_point now);

  std::chrono::milliseconds ttl_;
  Clock clock_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<detail::SessionEntry>> entries_;
};

}  // namespace seqgpt::server
