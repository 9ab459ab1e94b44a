import os
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
os.environ.setdefault("QVQE_FIXTURES", str(REPO / "fixtures"))
sys.path.insert(0, str(Path(__file__).resolve().parent))
