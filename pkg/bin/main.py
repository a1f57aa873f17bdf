import sys
from calderon.utils.main_utils import main


if __name__ == "__main__":
    sys.exit(main())
