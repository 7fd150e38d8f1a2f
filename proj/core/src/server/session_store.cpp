#include "seqgpt/server/session_store.hpp"

#include <utility>

namespace seqgpt::server {

namespace detail {
struct SessionEntry {
  SessionSlot slot;
  std::mutex mu;  // guards slot.session; the registry is only touched under a lease
  bool leased = false;
  std::chrono::steady_clock::time_point last_used;
};
}  // namespace detail

SessionLease::SessionLease(std::shared_ptr<detail::SessionEntry> entry, std::function<void()> release)
    : entry_(std::move(entry)), release_(std::move(release)) {}

SessionLease::SessionLease(SessionLease&& other) noexcept
    : entry_(std::move(other.entry_)), release_(std::exchange(other.release_, nullptr)) {}

SessionLease::~SessionLease() {
  if (release_) release_();
}

const dialogue::Session& SessionLease::session() const noexcept { return entry_->slot.session; }
const llm::BackendRegistry& SessionLease::backends() const noexcept { return entry_->slot.backends; }

void SessionLease::commit(dialogue::Session session) {
  std::lock_guard l(entry_->mu);
  entry_->slot.session = std::move(session);
}

InMemorySessionStore::InMemorySessionStore(std::chrono::milliseconds ttl, Clock clock)
    : ttl_(ttl), clock_(std::move(clock)) {}

std::chrono::steady_clock::time_point InMemorySessionStore::now() const {
  return clock_ ? clock_() : std::chrono::steady_clock::now();
}

void InMemorySessionStore::evict_locked(std::chrono::steady_clock::time_point t) {
  for (auto it = entries_.begin(); it != entries_.end();) {
    if (!it->second->leased && t - it->second->last_used > ttl_) {
      it = entries_.erase(it);
    } else {
      ++it;
    }
  }
}

void InMemorySessionStore::put(SessionSlot slot) {
  auto e = std::make_shared<detail::SessionEntry>();
  const std::string id = slot.session.id;
  e->slot = std::move(slot);
  std::lock_guard lock(mu_);
  const auto t = now();
  evict_locked(t);
  e->last_used = t;
  entries_[id] = std::move(e);
}

SessionLease InMemorySessionStore::acquire(const std::string& id) {
  std::lock_guard lock(mu_);
  const auto t = now();
  evict_locked(t);
  auto it = entries_.find(id);
  if (it == entries_.end()) throw UnknownSession(id);
  auto entry = it->second;
  if (entry->leased) throw SessionBusy(id);
  entry->leased = true;
  entry->last_used = t;
  return SessionLease(entry, [this, entry] {
    std::lock_guard l(mu_);
    entry->leased = false;
    entry->last_used = now();
  });
}

dialogue::Session InMemorySessionStore::snapshot(const std::string& id) {
  std::shared_ptr<detail::SessionEntry> entry;
  {
    std::lock_guard lock(mu_);
    const auto t = now();
    evict_locked(t);
    auto it = entries_.find(id);
    if (it == entries_.end()) throw UnknownSession(id);
    entry = it->second;
    entry->last_used = t;
  }
  std::lock_guard l(entry->mu);
  return entry->slot.session;
}

std::size_t InMemorySessionStore::size() {
  std::lock_guard lock(mu_);
  evict_locked(now());
  return entries_.size();
}

}  // namespace seqgpt::server
