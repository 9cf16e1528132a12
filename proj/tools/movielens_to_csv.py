#!/usr/bin/env python3
# Copyright (c) 2026 The GNOLR Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Convert a MovieLens release directory into the gnolr interaction CSV.

ml-1m reads ratings.dat, users.dat and movies.dat ("::" separated, latin-1).
ml-100k reads u.data, u.user and u.item.
"""

import argparse
import csv
import re
import sys
from pathlib import Path

HEADER = ["user_id", "item_id", "timestamp", "rating", "uf_gender", "uf_age",
          "uf_occupation", "uf_zip", "if_year", "if_genres"]
ML100K_GENRES = ["unknown", "Action", "Adventure", "Animation", "Children's", "Comedy",
                 "Crime", "Documentary", "Drama", "Fantasy", "Film-Noir", "Horror",
                 "Musical", "Mystery", "Romance", "Sci-Fi", "Thriller", "War", "Western"]


def read_lines(path, sep):
    with open(path, encoding="latin-1") as f:
        for line in f:
            line = line.rstrip("\r\n")
            if line:
                yield line.split(sep)


def year_of(title):
    m = re.search(r"\((\d{4})\)\s*$", title)
    return m.group(1) if m else ""


def load_ml1m(root):
    users = {u[0]: {"uf_gender": u[1], "uf_age": u[2], "uf_occupation": u[3], "uf_zip": u[4]}
             for u in read_lines(root / "users.dat", "::")}
    items = {m[0]: {"if_year": year_of(m[1]), "if_genres": m[2]}
             for m in read_lines(root / "movies.dat", "::")}
    ratings = ((r[0], r[1], r[3], r[2]) for r in read_lines(root / "ratings.dat", "::"))
    return users, items, ratings


def load_ml100k(root):
    users = {u[0]: {"uf_age": u[1], "uf_gender": u[2], "uf_occupation": u[3], "uf_zip": u[4]}
             for u in read_lines(root / "u.user", "|")}
    items = {}
    for m in read_lines(root / "u.item", "|"):
        flags = m[5:5 + len(ML100K_GENRES)]
        genres = "|".join(g for g, on in zip(ML100K_GENRES, flags) if on == "1")
        date = m[2]
        items[m[0]] = {"if_year": date[-4:] if len(date) >= 4 else "", "if_genres": genres}
    ratings = ((r[0], r[1], r[3], r[2]) for r in read_lines(root / "u.data", "\t"))
    return users, items, ratings


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("source", type=Path, help="directory of the MovieLens release")
    ap.add_argument("out", type=Path, help="CSV to write")
    ap.add_argument("--format", choices=["ml-1m", "ml-100k"], default="ml-1m")
    args = ap.parse_args(argv)

    loader = load_ml1m if args.format == "ml-1m" else load_ml100k
    users, items, ratings = loader(args.source)
    rows = 0
    with open(args.out, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(HEADER)
        for user, item, ts, rating in ratings:
            u = users.get(user, {})
            i = items.get(item, {})
            w.writerow([user, item, ts, rating] + [u.get(k, "") for k in HEADER[4:8]]
                       + [i.get(k, "") for k in HEADER[8:]])
            rows += 1
    print(f"rows={rows}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
