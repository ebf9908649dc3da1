class DegenerateInputError(ValueError):
    """The data make a coefficient or test statistic undefined."""
