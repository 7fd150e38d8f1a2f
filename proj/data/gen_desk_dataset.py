#!/usr/bin/env python3
"""Regenerates the bundled desk dataset (desk_pois.csv / desk_pois.geojson).

Output is deterministic. Positions are placed with the spherical
destination-point formula on a 6,371 km sphere, so great-circle
distances between placed points match the requested offsets.
"""
import csv
import json
import math
import random
from pathlib import Path

R = 6371000.0
HERE = Path(__file__).resolve().parent


def destination(lat, lon, bearing_deg, dist_m):
    phi1, lam1 = math.radians(lat), math.radians(lon)
    theta, delta = math.radians(bearing_deg), dist_m / R
    phi2 = math.asin(math.sin(phi1) * math.cos(delta) +
                     math.cos(phi1) * math.sin(delta) * math.cos(theta))
    lam2 = lam1 + math.atan2(math.sin(theta) * math.sin(delta) * math.cos(phi1),
                             math.cos(delta) - math.sin(phi1) * math.sin(phi2))
    return round(math.degrees(phi2), 7), round((math.degrees(lam2) + 540) % 360 - 180, 7)


CATEGORIES = {
    "mall": ["Plaza", "Galleria", "Arcade", "Centre"],
    "gym": ["Fitness", "Strength Studio", "Boxing Gym", "Yoga Loft"],
    "hotel": ["Hotel", "Suites", "Inn", "Residences"],
    "cafe": ["Coffee", "Espresso Bar", "Tea House", "Bakery Cafe"],
    "restaurant": ["Kitchen", "Bistro", "Noodle House", "Grill"],
    "station": ["Station", "Interchange"],
    "park": ["Park", "Gardens", "Green"],
    "museum": ["Museum", "Gallery"],
    "bank": ["Bank", "Savings"],
    "supermarket": ["Market", "Grocer"],
    "clinic": ["Clinic", "Medical Centre"],
    "school": ["Academy", "College"],
}

STREETS_SG = ["Raffles", "Temasek", "Bras Basah", "Beach Road", "Nicoll", "Esplanade",
              "Bencoolen", "Stamford", "Marina", "Middle Road", "Victoria", "Rochor"]
STREETS_SYD = ["George St", "Pitt St", "Market St", "King St", "Kent St", "Elizabeth St",
               "Martin Place", "Wynyard", "Barangaroo", "Haymarket", "Bathurst St", "Park St"]


def cluster(rng, prefix, center, radius_m, count, streets, fixed):
    pois = list(fixed)
    used = {p["name"] for p in pois}
    cats = list(CATEGORIES)
    i = len(pois)
    while len(pois) < count:
        cat = cats[i % len(cats)] if rng.random() < 0.6 else rng.choice(cats)
        name = f"{rng.choice(streets)} {rng.choice(CATEGORIES[cat])}"
        n = 2
        base = name
        while name in used:
            name = f"{base} {n}"
            n += 1
        used.add(name)
        dist = radius_m * math.sqrt(rng.random())
        lat, lon = destination(center[0], center[1], rng.uniform(0, 360), dist)
        i += 1
        pois.append({"id": f"{prefix}-{i:04d}", "name": name, "lat": lat, "lon": lon,
                     "category": cat})
    return pois


def main():
    rng = random.Random(20240)
    suntec = (1.2936, 103.8572)
    afch = destination(*suntec, 245.0, 461.0)
    sg_fixed = [
        {"id": "sg-0001", "name": "Suntec City", "lat": suntec[0], "lon": suntec[1], "category": "mall"},
        {"id": "sg-0002", "name": "Anytime Fitness City Hall", "lat": afch[0], "lon": afch[1], "category": "gym"},
    ]
    for j, (bearing, dist, name) in enumerate([
            (20.0, 201.0, "Pan Pacific Marina Hotel"),
            (130.0, 420.0, "Esplanade Bay Hotel"),
            (200.0, 640.0, "Bras Basah Grand Hotel"),
            (300.0, 780.0, "Stamford Court Suites"),
            (75.0, 910.0, "Nicoll Harbour Inn"),
    ]):
        lat, lon = destination(*suntec, bearing, dist)
        sg_fixed.append({"id": f"sg-{j + 3:04d}", "name": name, "lat": lat, "lon": lon,
                         "category": "hotel"})
    sg_fixed.append({"id": "sg-0008", "name": "City Hall Station", "lat": 1.2931, "lon": 103.8520,
                     "category": "station"})
    sg = cluster(rng, "sg", suntec, 1500.0, 230, STREETS_SG, sg_fixed)

    sydney = (-33.8688, 151.2093)
    syd_fixed = [
        {"id": "syd-0001", "name": "Westfield Sydney", "lat": -33.8703, "lon": 151.2085, "category": "mall"},
        {"id": "syd-0002", "name": "Queen Victoria Building", "lat": -33.8718, "lon": 151.2067, "category": "mall"},
        {"id": "syd-0003", "name": "Anytime Fitness Sydney CBD", "lat": -33.8668, "lon": 151.2061, "category": "gym"},
        {"id": "syd-0004", "name": "Town Hall Station", "lat": -33.8732, "lon": 151.2066, "category": "station"},
    ]
    syd = cluster(rng, "syd", sydney, 2000.0, 130, STREETS_SYD, syd_fixed)

    pois = sg + syd
    with open(HERE / "desk_pois.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["id", "name", "lat", "lon", "category"])
        for p in pois:
            w.writerow([p["id"], p["name"], repr(p["lat"]), repr(p["lon"]), p["category"]])
    features = [{"type": "Feature", "id": p["id"],
                 "geometry": {"type": "Point", "coordinates": [p["lon"], p["lat"]]},
                 "properties": {"name": p["name"], "category": p["category"]}} for p in pois]
    with open(HERE / "desk_pois.geojson", "w", encoding="utf-8") as f:
        json.dump({"type": "FeatureCollection", "features": features}, f, indent=1)
        f.write("\n")
    print(len(pois), "pois;", "anytime fitness at", afch)


if __name__ == "__main__":
    main()
