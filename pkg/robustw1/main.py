# Python Standard Libraries
import sys

# Local Libraries
from robustw1.cli import main


def start():
    sys.exit(main())


if __name__ == "__main__":
    start()
