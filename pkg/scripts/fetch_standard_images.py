"""Fetch the standard test images used by the benchmark into data/standard/.

The images are not redistributed with this repository. Lena and Cameraman
are pulled out of source distributions on PyPI (pinned by SHA-256), converted
to 8-bit grayscale and brought to 256x256. Peppers, Parrot and House have no
pinned source; drop 256x256 8-bit grayscale PNG or PGM copies named
``peppers.png``, ``parrot.png`` and ``house.png`` into the same directory.

Usage::

    python scripts/fetch_standard_images.py [--dest data/standard]
"""

import argparse
import hashlib
import io
import pathlib
import tarfile
import urllib.request

from PIL import Image

PYPI = "https://pypi.org/packages/"

# image id -> (sdist path on PyPI, sha256 of the sdist, member inside the tarball)
TARGETS = {
    "lena": (
        "71/e7/881fa2b6195141a2b91035b63ff78a6f11c5dbec5d39b012e9fadc193a95/scikit-image-0.9.3.tar.gz",
        "2c29c65aacdfc056efd0a3b713b5dde666356ffb39e5e2bad3e0d6dbb62524b3",
        "scikit-image-0.9.3/skimage/data/lena.png",
    ),
    "cameraman": (
        "e6/3a/ef3cbc420270472e3b4302acfd259ed58f5508ac217cc23eb9d1c7c1b204/bm3d-4.0.3.tar.gz",
        "e9cda8d65134b384fe1af50a40a446a77774711c1a3a7412e2144f5e8f3e4088",
        "bm3d-4.0.3/examples/cameraman256.png",
    ),
}

MANUAL = ("peppers", "parrot", "house")


def fetch(url: str, sha256: str) -> bytes:
    with urllib.request.urlopen(url, timeout=120) as resp:
        blob = resp.read()
    digest = hashlib.sha256(blob).hexdigest()
    if digest != sha256:
        raise RuntimeError(f"{url}: sha256 {digest} does not match pinned {sha256}")
    return blob


def to_gray256(raw: bytes) -> Image.Image:
    im = Image.open(io.BytesIO(raw))
    im = im.convert("L")
    if im.size != (256, 256):
        # 512 -> 256 by 2x2 box averaging, the usual way the 256 variants are made
        im = im.resize((256, 256), Image.Resampling.BOX)
    return im


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dest", default="data/standard", type=pathlib.Path)
    args = parser.parse_args(argv)
    args.dest.mkdir(parents=True, exist_ok=True)

    for name, (path, sha, member) in TARGETS.items():
        out = args.dest / f"{name}.png"
        if out.exists():
            print(f"{name}: already present at {out}")
            continue
        blob = fetch(PYPI + path, sha)
        with tarfile.open(fileobj=io.BytesIO(blob), mode="r:gz") as tar:
            raw = tar.extractfile(member).read()
        to_gray256(raw).save(out)
        print(f"{name}: wrote {out}")

    for name in MANUAL:
        found = [p for p in args.dest.glob(f"{name}.*") if p.suffix in (".png", ".pgm")]
        status = f"present ({found[0].name})" if found else "missing, supply manually"
        print(f"{name}: {status}")


if __name__ == "__main__":
    main()
