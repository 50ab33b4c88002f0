"""
Data Commands
gen-data: write a synthetic phantom set; export-image: dump one image as PGM.
"""
import argparse
import hashlib
from pathlib import Path

from app.commands.common import EXIT_OK, UsageError
from app.services.data import export_image_pgm, generate_phantoms, load_dataset, save_dataset


def file_checksum(path: Path) -> str:
    """SHA-256 hex digest of a file's bytes."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def cmd_gen_data(args: argparse.Namespace) -> int:
    """
    Generate phantoms and store them as LPTD.

    Prints the image count and the file checksum.
    """
    if args.n < 1:
        raise UsageError(f"--n must be at least 1, got {args.n}")
    ds = generate_phantoms(args.n, args.height, args.width, args.seed)
    path = save_dataset(ds, args.out)
    print(f"✅ Wrote {path}")
    print(f"count {len(ds)}")
    print(f"sha256 {file_checksum(path)}")
    return EXIT_OK


def cmd_export_image(args: argparse.Namespace) -> int:
    ds = load_dataset(args.data)
    if not 0 <= args.index < len(ds):
        raise UsageError(f"--index {args.index} outside 0..{len(ds) - 1}")
    path = export_image_pgm(ds, args.index, args.out)
    print(f"✅ Wrote image {args.index} to {path}")
    return EXIT_OK


def register(subparsers: argparse._SubParsersAction) -> None:
    gen = subparsers.add_parser("gen-data", help="Generate a synthetic phantom dataset (LPTD)")
    gen.add_argument("--n", type=int, default=512, help="Number of images")
    gen.add_argument("--height", type=int, default=64)
    gen.add_argument("--width", type=int, default=64)
    gen.add_argument("--seed", type=int, default=7)
    gen.add_argument("--out", required=True, help="Destination .lptd file")
    gen.set_defaults(handler=cmd_gen_data)

    export = subparsers.add_parser("export-image", help="Write one dataset image as an 8-bit PGM")
    export.add_argument("--data", required=True, help="LPTD dataset")
    export.add_argument("--index", type=int, default=0)
    export.add_argument("--out", required=True, help="Destination .pgm file")
    export.set_defaults(handler=cmd_export_image)
