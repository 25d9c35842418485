#!/usr/bin/env python3
"""Fetch the benchmark datasets and convert them to LIBSVM text files.

Sources (all public):
  * Raetsch/IDA benchmark collection (banana, b.cancer, diabetes, german,
    image, ringnorm, f.solar, thyroid, titanic, twonorm, waveform):
    benchmarks.mat from github.com/tdiethe/gunnar_raetsch_benchmark_datasets
  * PMLB (sonar, ionosphere, monks1):
    github.com/EpistasisLab/pmlb
  * LIBOL (svmguide3): github.com/LIBOL/LIBOL
  * Adult/a9a in the 123-feature encoding:
    github.com/Angel-ML/angel (data/a9a), used to cut a1a/a3a/a4a-sized
    training files when the LIBSVM site is unreachable. The canonical files
    live at https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary/
    and drop in at the same paths.

Writes <out>/<name>.libsvm plus <out>/manifest.json. Pass --mirror-prefix to
rewrite https://github.com/ fetches through a proxy.
"""

import argparse
import gzip
import io
import json
import sys
import urllib.request
from pathlib import Path

GITHUB = "https://github.com/"

SOURCES = {
    "benchmarks.mat": GITHUB + "tdiethe/gunnar_raetsch_benchmark_datasets/raw/master/benchmarks.mat",
    "sonar.tsv.gz": GITHUB + "EpistasisLab/pmlb/raw/master/datasets/sonar/sonar.tsv.gz",
    "ionosphere.tsv.gz": GITHUB + "EpistasisLab/pmlb/raw/master/datasets/ionosphere/ionosphere.tsv.gz",
    "monk1.tsv.gz": GITHUB + "EpistasisLab/pmlb/raw/master/datasets/monk1/monk1.tsv.gz",
    "svmguide3.mat": GITHUB + "LIBOL/LIBOL/raw/master/data/svmguide3.mat",
    "a9a_train.libsvm": GITHUB + "Angel-ML/angel/raw/master/data/a9a/a9a_123d_train.libsvm",
}

# Raetsch archive key -> (manifest name, train, test)
RAETSCH = {
    "banana": ("banana", 400, 4900),
    "breast_cancer": ("b.cancer", 200, 77),
    "diabetis": ("diabetes", 468, 300),
    "german": ("german", 700, 300),
    "image": ("image", 1300, 1010),
    "ringnorm": ("ringnorm", 400, 7000),
    "flare_solar": ("f.solar", 666, 400),
    "thyroid": ("thyroid", 140, 75),
    "titanic": ("titanic", 150, 2051),
    "twonorm": ("twonorm", 400, 7000),
    "waveform": ("waveform", 400, 4600),
}

# LIBSVM adult training files: (name, rows to keep from a9a, train, test)
ADULT = [("a1a", 1605, 802, 803), ("a3a", 3185, 1592, 1593), ("a4a", 4783, 2391, 2392)]

PMLB = [("sonar", "sonar.tsv.gz", 104, 104),
        ("ionosphere", "ionosphere.tsv.gz", 175, 176),
        ("monks1", "monk1.tsv.gz", 278, 278)]


def fetch(name, url, cache_dir):
    path = cache_dir / name
    if path.exists():
        return path
    print(f"fetching {url}")
    with urllib.request.urlopen(url, timeout=120) as response:
        path.write_bytes(response.read())
    return path


def fmt(value):
    if float(value) == int(value):
        return str(int(value))
    return f"{value:.12g}"


def write_libsvm(path, features, labels):
    with open(path, "w") as out:
        for row, label in zip(features, labels):
            pairs = [f"{j + 1}:{fmt(v)}" for j, v in enumerate(row) if v != 0]
            out.write(" ".join([f"{int(label):+d}"] + pairs) + "\n")


def safe_name(name):
    return name.replace(".", "_")


def convert_raetsch(cache_dir, out_dir, manifest):
    import scipy.io as sio

    mat = sio.loadmat(cache_dir / "benchmarks.mat")
    for key, (name, train, test) in sorted(RAETSCH.items()):
        entry = mat[key]
        x = entry["x"][0, 0]
        t = entry["t"][0, 0].ravel()
        # The archive stores unique rows plus predefined split indices; some
        # sets (b.cancer, f.solar, image, titanic) have duplicate rows in the
        # original files. Split 0's train+test indices are the full original
        # multiset, so expand through them.
        rows = list(entry["train"][0, 0][0]) + list(entry["test"][0, 0][0])
        if len(rows) != train + test:
            raise SystemExit(f"{name}: expected {train + test} rows, got {len(rows)}")
        features = [x[i - 1] for i in rows]  # 1-based indices
        labels = [t[i - 1] for i in rows]
        filename = safe_name(name) + ".libsvm"
        write_libsvm(out_dir / filename, features, labels)
        manifest.append({"name": name, "path": filename,
                         "train_size": train, "test_size": test})
        print(f"{name}: {len(rows)} rows ({x.shape[0]} unique), d={x.shape[1]}")


def convert_pmlb(cache_dir, out_dir, manifest):
    for name, source, train, test in PMLB:
        with gzip.open(cache_dir / source, "rt") as f:
            header = f.readline().rstrip("\n").split("\t")
            rows = [line.rstrip("\n").split("\t") for line in f if line.strip()]
        target_col = len(header) - 1
        features = [[float(v) for v in row[:target_col]] for row in rows]
        labels = [1 if int(float(row[target_col])) == 1 else -1 for row in rows]
        if len(rows) != train + test:
            raise SystemExit(f"{name}: expected {train + test} rows, got {len(rows)}")
        filename = safe_name(name) + ".libsvm"
        write_libsvm(out_dir / filename, features, labels)
        manifest.append({"name": name, "path": filename,
                         "train_size": train, "test_size": test})
        print(f"{name}: {len(rows)} rows, d={target_col}")


def convert_svmguide3(cache_dir, out_dir, manifest):
    import scipy.io as sio

    data = sio.loadmat(cache_dir / "svmguide3.mat")["data"]
    if data.shape[0] != 1243:
        raise SystemExit(f"svmguide3: expected 1243 rows, got {data.shape[0]}")
    write_libsvm(out_dir / "svmguide3.libsvm", data[:, 1:], data[:, 0])
    manifest.append({"name": "svmguide3", "path": "svmguide3.libsvm",
                     "train_size": 621, "test_size": 622})
    print(f"svmguide3: {data.shape[0]} rows, d={data.shape[1] - 1}")


def convert_adult(cache_dir, out_dir, manifest, mirror_prefix):
    canonical = "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary/"
    for name, rows, train, test in ADULT:
        lines = None
        try:
            with urllib.request.urlopen(canonical + name, timeout=30) as response:
                lines = response.read().decode().splitlines()
            print(f"{name}: canonical file")
        except Exception:
            pass
        if lines is None:
            # Offline fallback: the aXa training sets share a9a's encoding;
            # keep the first `rows` lines of the a9a training file.
            a9a = (cache_dir / "a9a_train.libsvm").read_text().splitlines()
            lines = a9a[:rows]
            max_index = max(int(tok.split(":")[0])
                            for line in lines for tok in line.split()[1:])
            if max_index < 123:
                lines[0] += " 123:0"  # width marker, value unchanged
            print(f"{name}: first {rows} rows of a9a (max index {max_index})")
        if len(lines) != rows:
            raise SystemExit(f"{name}: expected {rows} rows, got {len(lines)}")
        (out_dir / f"{name}.libsvm").write_text("\n".join(lines) + "\n")
        manifest.append({"name": name, "path": f"{name}.libsvm",
                         "train_size": train, "test_size": test})


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data", type=Path)
    parser.add_argument("--cache-dir", default=Path("/tmp/ngmkl-datasets"), type=Path)
    parser.add_argument("--mirror-prefix", default=None,
                        help="rewrite https://github.com/ to this prefix")
    args = parser.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    args.cache_dir.mkdir(parents=True, exist_ok=True)

    for name, url in SOURCES.items():
        if args.mirror_prefix:
            url = url.replace(GITHUB, args.mirror_prefix.rstrip("/") + "/")
        fetch(name, url, args.cache_dir)

    manifest = []
    convert_adult(args.cache_dir, args.out, manifest, args.mirror_prefix)
    convert_pmlb(args.cache_dir, args.out, manifest)
    convert_svmguide3(args.cache_dir, args.out, manifest)
    convert_raetsch(args.cache_dir, args.out, manifest)

    for entry in manifest:
        entry["repetitions"] = 10

    order = ["a1a", "a3a", "a4a", "ionosphere", "monks1", "sonar", "svmguide3",
             "banana", "b.cancer", "diabetes", "german", "image", "ringnorm",
             "f.solar", "thyroid", "titanic", "twonorm", "waveform"]
    manifest.sort(key=lambda e: order.index(e["name"]))

    with open(args.out / "manifest.json", "w") as f:
        json.dump({"datasets": manifest}, f, indent=2)
        f.write("\n")
    print(f"manifest with {len(manifest)} datasets -> {args.out / 'manifest.json'}")


if __name__ == "__main__":
    sys.exit(main())
