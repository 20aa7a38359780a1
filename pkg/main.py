import os
import sys

# Add the project root to the Python path so 'from src...' imports work from anywhere
project_root = os.path.dirname(os.path.abspath(__file__))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from src.cli import main
from src.utils.sim_utils import setup_logging

if __name__ == "__main__":
    setup_logging()
    sys.exit(main())
