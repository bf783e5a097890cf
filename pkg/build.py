#!/usr/bin/env python3
"""Build a standalone pouw executable using PyInstaller.

Usage:
    python build.py                    # one-file build of the pouw CLI
    python build.py --with-circuits    # also ship circuits/*.zk next to the code
    python build.py --clean            # remove build/ and dist/ first

The binary lands in dist/pouw (dist/pouw.exe on Windows) and must be built on
the platform it targets. numpy is collected automatically; scipy and pytest are
test-only and kept out of the bundle.
"""

from __future__ import annotations

import argparse
import platform
import shutil
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).parent
DIST = ROOT / "dist"
BUILD = ROOT / "build"
ENTRY = ROOT / "pouw" / "__main__.py"
CIRCUITS = ROOT / "circuits"
NAME = "pouw"
TEST_ONLY = ("scipy", "pytest", "tkinter")


def pyinstaller_command(with_circuits: bool) -> list[str]:
    cmd = [sys.executable, "-m", "PyInstaller", "--onefile", "--noconfirm", "--name", NAME]
    cmd += ["--collect-submodules", NAME, "--hidden-import", "numpy"]
    for module in TEST_ONLY:
        cmd += ["--exclude-module", module]
    if sys.version_info < (3, 11):
        cmd += ["--hidden-import", "tomli"]
    if with_circuits:
        sep = ";" if platform.system() == "Windows" else ":"
        cmd += ["--add-data", f"{CIRCUITS}{sep}circuits"]
    cmd.append(str(ENTRY))
    return cmd


def clean() -> None:
    print("[build] Removing build/, dist/ and stale .spec files")
    for directory in (DIST, BUILD):
        shutil.rmtree(directory, ignore_errors=True)
    for stale in ROOT.glob("*.spec"):
        stale.unlink()


def main() -> None:
    parser = argparse.ArgumentParser(description="Build the pouw standalone executable")
    parser.add_argument("--with-circuits", action="store_true",
                        help="Bundle the example circuits")
    parser.add_argument("--clean", action="store_true",
                        help="Remove build and dist directories before building")
    args = parser.parse_args()

    try:
        import PyInstaller  # noqa: F401
    except ImportError:
        sys.exit("[build] PyInstaller is missing; install the dev extra: pip install -e '.[dev]'")
    if args.with_circuits and not CIRCUITS.is_dir():
        sys.exit(f"[build] --with-circuits given but {CIRCUITS} does not exist")
    if args.clean:
        clean()

    cmd = pyinstaller_command(args.with_circuits)
    print(f"[build] {NAME} on {platform.system()}/{platform.machine()}: {' '.join(cmd[3:])}")
    status = subprocess.run(cmd, cwd=ROOT).returncode
    if status:
        sys.exit(f"[build] PyInstaller exited with status {status}")

    binary = DIST / (NAME + (".exe" if platform.system() == "Windows" else ""))
    if not binary.exists():
        sys.exit(f"[build] PyInstaller finished but {binary} is missing")
    print(f"[build] {binary} ({binary.stat().st_size / 1e6:.1f} MB)")
    print(f"[build] Smoke test: {binary} experiment overlap --m 100 --t 10")


if __name__ == "__main__":
    main()
