"""
circleflow - spherical circle patterns with prescribed total geodesic curvature
Main entry point for the command-line tool

Usage:
    python main.py example tetrahedron > tetra.yaml
    python main.py check tetra.yaml
    python main.py solve tetra.yaml --method both --trajectory tetra.csv
    python main.py report solved.yaml
"""

import os
import sys
import logging
from dotenv import load_dotenv

# Add the repository root to the path for `src.` imports
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.cli.commands import build_parser, dispatch
from src.utils.config import get_settings

logger = logging.getLogger(__name__)


def configure_logging(verbose: bool = False) -> None:
    """Log to stderr so stdout stays a machine-readable document"""
    level_name = "DEBUG" if verbose else get_settings().log_level
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.INFO
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.StreamHandler(sys.stderr)
        ]
    )


def main(argv=None):
    """Main entry point"""

    # Load environment variables first
    load_dotenv()

    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)

    try:
        return dispatch(args)
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        return 130
    except Exception as e:
        logger.error(f"Fatal error: {e}", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
