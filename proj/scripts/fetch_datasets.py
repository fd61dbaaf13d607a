#!/usr/bin/env python3
"""Fetch the image datasets into the layout the harness reads.

Usage: python3 scripts/fetch_datasets.py [DATA_DIR]

Produces:
    DATA_DIR/fashion_mnist/train-images-idx3-ubyte
    DATA_DIR/fashion_mnist/train-labels-idx1-ubyte
    DATA_DIR/fashion_mnist/t10k-images-idx3-ubyte
    DATA_DIR/fashion_mnist/t10k-labels-idx1-ubyte
    DATA_DIR/pneumoniamnist.npz

The library itself never touches the network; run this once (or place the
files yourself), then point runs at DATA_DIR via --data-dir or QFL_DATA_DIR.
The moons dataset is generated in-process and needs no files.
"""

import gzip
import sys
import urllib.request
from pathlib import Path

FASHION_FILES = [
    "train-images-idx3-ubyte",
    "train-labels-idx1-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte",
]

FASHION_MIRRORS = [
    "https://storage.googleapis.com/tensorflow/tf-keras-datasets/{}.gz",
    "http://fashion-mnist.s3-website.eu-central-1.amazonaws.com/{}.gz",
]

PNEUMONIA_URLS = [
    "https://zenodo.org/records/10519652/files/pneumoniamnist.npz",
    "https://zenodo.org/records/6496656/files/pneumoniamnist.npz",
]


def download(urls, dest: Path) -> None:
    if dest.exists():
        print(f"  {dest} already present ({dest.stat().st_size} bytes)")
        return
    last_error = None
    for url in urls:
        try:
            print(f"  fetching {url}")
            with urllib.request.urlopen(url, timeout=120) as response:
                payload = response.read()
            if url.endswith(".gz"):
                payload = gzip.decompress(payload)
            dest.write_bytes(payload)
            print(f"  wrote {dest} ({len(payload)} bytes)")
            return
        except Exception as error:  # noqa: BLE001 - report and try the mirror
            print(f"    failed: {error}")
            last_error = error
    raise SystemExit(f"could not fetch {dest.name}: {last_error}")


def main() -> None:
    data_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data")
    fashion_dir = data_dir / "fashion_mnist"
    fashion_dir.mkdir(parents=True, exist_ok=True)

    print("FashionMNIST:")
    for name in FASHION_FILES:
        download([m.format(name) for m in FASHION_MIRRORS], fashion_dir / name)

    print("PneumoniaMNIST:")
    download(PNEUMONIA_URLS, data_dir / "pneumoniamnist.npz")

    print("done; verify with: qfl datasets check", data_dir)


if __name__ == "__main__":
    main()
