#  Copyright 2024 Amazon.com, Inc. or its affiliates.

import sys

from aws.osml.auction_quantile.cli import main

if __name__ == "__main__":
    sys.exit(main())
