#!/usr/bin/env python3
"""Fetch the census income files into data/adult/.

Tries the UCI archive first and falls back to the copy bundled in the
`responsibly` wheel on PyPI.
"""
import argparse
import io
import pathlib
import subprocess
import sys
import tempfile
import urllib.request
import zipfile

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases/adult/"
FILES = ["adult.data", "adult.test"]


def from_uci(out):
    for name in FILES:
        with urllib.request.urlopen(UCI + name, timeout=30) as r:
            (out / name).write_bytes(r.read())


def from_wheel(out):
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "--no-deps", "-d", tmp, "responsibly==0.1.2"],
            check=True,
        )
        wheel = next(pathlib.Path(tmp).glob("responsibly-*.whl"))
        with zipfile.ZipFile(wheel) as z:
            for name in FILES:
                (out / name).write_bytes(z.read(f"responsibly/dataset/adult/{name}"))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data/adult")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        from_uci(out)
    except Exception as e:
        print(f"UCI download failed ({e}); using PyPI wheel", file=sys.stderr)
        from_wheel(out)
    for name in FILES:
        print(out / name, (out / name).stat().st_size, "bytes")


if __name__ == "__main__":
    main()
