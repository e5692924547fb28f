"""Main entry point for the fairgen command-line tool."""

import logging
import sys

from src.cli import run
from src.config import get_settings


def setup_logging() -> None:
    """Configure application logging."""
    settings = get_settings()

    level = logging.DEBUG if settings.debug else getattr(logging, settings.log_level.upper())
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[
            logging.StreamHandler(sys.stdout),
        ],
    )

    # Reduce noise from external libraries
    logging.getLogger("matplotlib").setLevel(logging.WARNING)
    logging.getLogger("PIL").setLevel(logging.WARNING)


def main() -> None:
    """Main entry point."""
    setup_logging()
    try:
        code = run(sys.argv[1:])
    except KeyboardInterrupt:
        logging.info("Stopped by user")
        code = 130
    sys.exit(code)


if __name__ == "__main__":
    main()
