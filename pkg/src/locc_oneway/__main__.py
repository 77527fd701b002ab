#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""The module wrapper for the one-way LOCC tool."""

import sys

from locc_oneway.main import main

if __name__ == "__main__":
    sys.exit(main())
