#!/usr/bin/env python3
# Copyright 2026 The fairmiss Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Fetches the Adult, COMPAS two-year and Titanic datasets and writes the
normalised CSV + schema files under data/.

Raw files are looked up in --raw-dir first, then in locally installed Python
packages that ship them (responsibly, scikit-learn test fixtures), and only
then downloaded from the canonical URLs. Every raw file is checked against
the digests below before use.
"""

import argparse
import csv
import gzip
import hashlib
import io
import json
import os
import sys
import urllib.request
import zipfile

RAW = {
    "adult.data": {
        "url": "https://archive.ics.uci.edu/ml/machine-learning-databases/adult/adult.data",
        "sha256": "5b00264637dbfec36bdeaab5676b0b309ff9eb788d63554ca0a249491c86603d",
    },
    "adult.test": {
        "url": "https://archive.ics.uci.edu/ml/machine-learning-databases/adult/adult.test",
        "sha256": "a2a9044bc167a35b2361efbabec64e89d69ce82d9790d2980119aac5fd7e9c05",
    },
    "compas-scores-two-years.csv": {
        "url": "https://raw.githubusercontent.com/propublica/compas-analysis/master/compas-scores-two-years.csv",
        "sha256": "c451db85908b2f7fef1d83203bedf6b71ecda0d5af468d82ae62178f91d0cc7d",
    },
    # OpenML dataset 40945 (titanic3, 1309 passengers), ARFF payload.
    "titanic.arff": {
        "url": "https://api.openml.org/data/v1/download/16826755/titanic.arff",
        "sha256": "c56e3785c96cd8aceac85f11bff21c2bf72841426f50903a6f27be8f334a7d03",
    },
}

ADULT_COLUMNS = [
    ("age", "numeric"), ("workclass", "categorical"), ("fnlwgt", "numeric"),
    ("education", "categorical"), ("education_num", "numeric"),
    ("marital_status", "categorical"), ("occupation", "categorical"),
    ("relationship", "categorical"), ("race", "categorical"), ("sex", "categorical"),
    ("capital_gain", "numeric"), ("capital_loss", "numeric"),
    ("hours_per_week", "numeric"), ("native_country", "categorical"),
    ("income", "label"),
]

COMPAS_COLUMNS = [
    ("sex", "categorical"), ("age", "numeric"), ("age_cat", "categorical"),
    ("race", "categorical"), ("juv_fel_count", "numeric"), ("juv_misd_count", "numeric"),
    ("juv_other_count", "numeric"), ("priors_count", "numeric"),
    ("days_b_screening_arrest", "numeric"), ("c_days_from_compas", "numeric"),
    ("c_charge_degree", "categorical"), ("c_charge_desc", "categorical"),
    ("two_year_recid", "label"),
]

TITANIC_COLUMNS = [
    ("pclass", "categorical"), ("sex", "categorical"), ("age", "numeric"),
    ("sibsp", "numeric"), ("parch", "numeric"), ("fare", "numeric"),
    ("embarked", "categorical"), ("survived", "label"),
]

GROUPS = {
    "adult_race": ("race", ["White"], ">50K"),
    "adult_sex": ("sex", ["Male"], ">50K"),
    "compas_race": ("race", ["Caucasian"], "0"),
    "compas_sex": ("sex", ["Female"], "0"),
    "titanic_class": ("pclass", ["1"], "1"),
    "titanic_sex": ("sex", ["female"], "1"),
}


def sha256(data):
    return hashlib.sha256(data).hexdigest()


def from_installed(name):
    try:
        import importlib.util
        if name.startswith("adult") or name.startswith("compas"):
            spec = importlib.util.find_spec("responsibly")
            if spec is None:
                return _from_responsibly_wheel(name)
            base = os.path.dirname(spec.origin)
            sub = "adult" if name.startswith("adult") else "compas"
            path = os.path.join(base, "dataset", sub, name)
            if os.path.exists(path):
                with open(path, "rb") as f:
                    return f.read()
        if name == "titanic.arff":
            spec = importlib.util.find_spec("sklearn")
            if spec is not None:
                path = os.path.join(os.path.dirname(spec.origin), "datasets", "tests", "data",
                                    "openml", "id_40945", "data-v1-dl-16826755.arff.gz")
                if os.path.exists(path):
                    with gzip.open(path, "rb") as f:
                        return f.read()
    except Exception:  # pragma: no cover - best effort lookup
        return None
    return None


def _from_responsibly_wheel(name):
    wheel_dir = os.environ.get("FAIRMISS_WHEEL_DIR")
    if not wheel_dir:
        return None
    for entry in os.listdir(wheel_dir):
        if entry.startswith("responsibly") and entry.endswith(".whl"):
            sub = "adult" if name.startswith("adult") else "compas"
            with zipfile.ZipFile(os.path.join(wheel_dir, entry)) as z:
                return z.read("responsibly/dataset/%s/%s" % (sub, name))
    return None


def obtain(name, raw_dir):
    info = RAW[name]
    data = None
    if raw_dir and os.path.exists(os.path.join(raw_dir, name)):
        with open(os.path.join(raw_dir, name), "rb") as f:
            data = f.read()
    if data is None:
        data = from_installed(name)
    if data is None:
        print("downloading %s" % info["url"], file=sys.stderr)
        with urllib.request.urlopen(info["url"], timeout=60) as r:
            data = r.read()
    digest = sha256(data)
    if digest != info["sha256"]:
        sys.exit("digest mismatch for %s: %s" % (name, digest))
    return data


def write_dataset(out_dir, stem, columns, rows):
    names = [c for c, _ in columns]
    with open(os.path.join(out_dir, stem + ".csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(names)
        for row in rows:
            w.writerow(row)
    schema = {}
    for c, kind in columns:
        if kind == "label":
            schema[c] = {"kind": "categorical", "is_label": True}
        else:
            schema[c] = {"kind": kind, "is_label": False}
    with open(os.path.join(out_dir, stem + ".schema.json"), "w") as f:
        json.dump(schema, f, indent=2)
        f.write("\n")


def adult_rows(raw_dir):
    rows = []
    for name in ("adult.data", "adult.test"):
        text = obtain(name, raw_dir).decode("utf-8")
        for line in text.splitlines():
            if not line.strip() or line.startswith("|"):
                continue
            cells = [c.strip() for c in line.split(",")]
            cells[-1] = cells[-1].rstrip(".")
            rows.append(cells)
    return rows


def compas_rows(raw_dir):
    text = obtain("compas-scores-two-years.csv", raw_dir).decode("utf-8")
    reader = csv.DictReader(io.StringIO(text))
    out = []
    for rec in reader:
        out.append(["?" if rec[c] == "" else rec[c] for c, _ in COMPAS_COLUMNS])
    return out


def titanic_rows(raw_dir):
    text = obtain("titanic.arff", raw_dir).decode("utf-8")
    attrs = []
    body = []
    in_data = False
    for line in text.splitlines():
        if in_data:
            if line.strip():
                body.append(line)
        elif line.lower().startswith("@attribute"):
            attrs.append(line.split()[1].strip("'"))
        elif line.lower().startswith("@data"):
            in_data = True
    out = []
    for rec in csv.reader(body, quotechar='"', skipinitialspace=True):
        d = dict(zip(attrs, rec))
        out.append([d[c] for c, _ in TITANIC_COLUMNS])
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--raw-dir", default=None, help="directory holding already downloaded raw files")
    ap.add_argument("--out-dir", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    args = ap.parse_args()
    os.makedirs(os.path.join(args.out_dir, "groups"), exist_ok=True)

    write_dataset(args.out_dir, "adult", ADULT_COLUMNS, adult_rows(args.raw_dir))
    write_dataset(args.out_dir, "compas", COMPAS_COLUMNS, compas_rows(args.raw_dir))
    write_dataset(args.out_dir, "titanic", TITANIC_COLUMNS, titanic_rows(args.raw_dir))
    for stem, (attr, priv, fav) in GROUPS.items():
        with open(os.path.join(args.out_dir, "groups", stem + ".json"), "w") as f:
            json.dump({"protected_attribute": attr, "privileged_values": priv,
                       "favourable_class": fav}, f, indent=2)
            f.write("\n")

    sums = []
    for stem in ("adult", "compas", "titanic"):
        with open(os.path.join(args.out_dir, stem + ".csv"), "rb") as f:
            sums.append("%s  %s.csv" % (sha256(f.read()), stem))
    with open(os.path.join(args.out_dir, "SHA256SUMS"), "w") as f:
        f.write("\n".join(sums) + "\n")
    print("\n".join(sums))


if __name__ == "__main__":
    main()
