"""
Capsule GAN toolkit - Main Entry Point

Usage:
    python main.py train --arch capsgan2 --data train-images-idx3-ubyte.gz --epochs 1 --out run/
    capsgan --help
"""

import sys
import os

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from capsgan.cli.main import main

if __name__ == "__main__":
    main()
