#!/usr/bin/env python3
# Copyright 2026 The aqilung Authors
# SPDX-License-Identifier: Apache-2.0
"""Converts the downloaded Kaggle files into aqilung's input layout.

air:      writes filename,city,country,timestamp,AQI,PM2.5,PM10,O3,CO,SO2,NO2
          with filenames relative to the image root.
patients: copies the patient CSV without its leading unnamed index column.
"""

import argparse
import csv
import os
import sys

# Keyword -> site name understood by aqilung. Matched against the lowercased
# location text, first hit wins.
SITES = [
    ("ito", "ITO (Delhi)"),
    ("delhi", "ITO (Delhi)"),
    ("knowledge", "Knowledge Park (Greater Noida)"),
    ("noida", "Knowledge Park (Greater Noida)"),
    ("faridabad", "New Industrial Town (Faridabad)"),
    ("industrial", "New Industrial Town (Faridabad)"),
    ("dimapur", "Dimapur (Nagaland)"),
    ("nagaland", "Dimapur (Nagaland)"),
    ("bengaluru", "Bengaluru"),
    ("bangalore", "Bengaluru"),
    ("mumbai", "Mumbai"),
    ("tamil", "Tamil Nadu"),
    ("chennai", "Tamil Nadu"),
]
NEPAL_HINTS = ("nepal", "kathmandu", "pokhara", "biratnagar", "bhaktapur", "lalitpur", "dhulikhel", "janakpur", "bharatpur")
TARGETS = ["AQI", "PM2.5", "PM10", "O3", "CO", "SO2", "NO2"]


def pick(header, *names):
    low = {h.strip().lower(): h for h in header}
    for n in names:
        if n.lower() in low:
            return low[n.lower()]
    return None


def site_of(location):
    text = location.lower()
    if any(h in text for h in NEPAL_HINTS):
        return location, "Nepal"
    for key, site in SITES:
        if key in text:
            return site, "India"
    return location, ""


def index_images(root):
    found = {}
    for dirpath, _, files in os.walk(root):
        for f in files:
            found.setdefault(f, os.path.relpath(os.path.join(dirpath, f), root))
    return found


def convert_air(src, image_root, dst):
    images = index_images(image_root)
    with open(src, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        h = reader.fieldnames or []
        col = {
            "file": pick(h, "Filename", "filename", "Image", "image_name"),
            "loc": pick(h, "Location", "City", "location", "Station"),
            "ts": pick(h, "Timestamp", "DateTime", "Date_Time"),
            "y": pick(h, "Year"), "m": pick(h, "Month"), "d": pick(h, "Day"), "hr": pick(h, "Hour"),
        }
        targets = {t: pick(h, t, t.replace(".", "")) for t in TARGETS}
        missing = [k for k in ("file", "loc") if col[k] is None] + [t for t, c in targets.items() if c is None]
        if col["ts"] is None and None in (col["y"], col["m"], col["d"], col["hr"]):
            missing.append("timestamp or Year/Month/Day/Hour")
        if missing:
            sys.exit(f"air csv {src}: cannot find columns {missing}; header is {h}")

        rows, unmapped, no_image = 0, {}, 0
        with open(dst, "w", newline="") as out:
            w = csv.writer(out)
            w.writerow(["filename", "city", "country", "timestamp"] + TARGETS)
            for r in reader:
                rows += 1
                name = os.path.basename(r[col["file"]].strip())
                rel = images.get(name)
                if rel is None:
                    no_image += 1
                    rel = name  # aqilung counts and drops it
                city, country = site_of(r[col["loc"]].strip())
                if not country:
                    unmapped[city] = unmapped.get(city, 0) + 1
                if col["ts"]:
                    ts = r[col["ts"]].strip()
                else:
                    try:
                        ts = "%04d-%02d-%02d %02d:00" % tuple(int(float(r[col[k]])) for k in ("y", "m", "d", "hr"))
                    except ValueError:
                        ts = ""
                w.writerow([rel, city, country, ts] + [r[targets[t]].strip() for t in TARGETS])
    print(f"air: {rows} rows, {no_image} without a matching image file")
    for city, n in sorted(unmapped.items(), key=lambda kv: -kv[1]):
        print(f"  unmapped location {city!r}: {n} rows (dropped by the India filter)")


def convert_patients(src, dst):
    with open(src, newline="", encoding="utf-8-sig") as fh:
        rows = list(csv.reader(fh))
    if rows and rows[0] and rows[0][0].strip().lower() in ("", "index"):
        rows = [r[1:] for r in rows]
    with open(dst, "w", newline="") as out:
        csv.writer(out).writerows(rows)
    print(f"patients: {len(rows) - 1} rows, {len(rows[0])} columns")


def main(argv):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)
    a = sub.add_parser("air")
    a.add_argument("src")
    a.add_argument("image_root")
    a.add_argument("dst")
    p = sub.add_parser("patients")
    p.add_argument("src")
    p.add_argument("dst")
    args = ap.parse_args(argv)
    if args.cmd == "air":
        convert_air(args.src, args.image_root, args.dst)
    else:
        convert_patients(args.src, args.dst)


if __name__ == "__main__":
    main(sys.argv[1:])
