"""
Entry point for the calabi command line
"""
import logging
import os
import sys

from dotenv import load_dotenv

from calabi_lab.shell import run_cli

# Load environment variables
load_dotenv()


def setup_logging():
    level = os.getenv('CALABI_LOG_LEVEL', 'INFO').upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format='%(asctime)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(os.getenv('CALABI_LOG_FILE', 'calabi.log')),
            logging.StreamHandler()
        ]
    )


def main():
    setup_logging()
    return run_cli(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
