import sys

from dirac_jump_studio.cli import main

if __name__ == "__main__":
    sys.exit(main())
