#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# mypy: disable-error-code="no-any-unimported"
"""Values with uncertainties, for Monte-Carlo success rates."""

from math import sqrt

from uncertainties.core import Variable


class UFloat(Variable):  # type: ignore[misc]
    """A floating point estimate with a standard error.

    Args:
        nominal_value: The estimate, propagated by arithmetic as a float.
        std_dev: The standard error of the estimate. Defaults to None.
        tag: An optional string tag for the variable. Defaults to None.
    """

    nominal_value: float
    std_dev: float | None
    tag: str | None

    def __str__(self) -> str:
        """Modify the default implementation of stringify-ing the class."""
        return super().__str__().replace("+/-", " ± ")  # type: ignore[no-any-return]


def binomial_rate(successes: int, trials: int) -> UFloat:
    """Get the success rate of some Bernoulli trials with its standard error.

    No trials give the vacuous rate of one with no uncertainty.
    """
    if trials == 0:
        return UFloat(1.0, 0.0, tag="success_rate")
    rate = successes / trials
    return UFloat(rate, sqrt(rate * (1 - rate) / trials), tag="success_rate")
