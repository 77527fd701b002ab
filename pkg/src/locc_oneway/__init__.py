#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Decide and construct one-way LOCC protocols for orthogonal bipartite states."""

__version__ = "0.1.0"
