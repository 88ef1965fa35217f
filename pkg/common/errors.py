class SumcapError(ValueError):
    """Base for every input/parameter error raised by the toolkit."""


class DimensionError(SumcapError):
    pass


class InvalidStateError(SumcapError):
    pass


class InvalidChannelError(SumcapError):
    pass


class ConfigError(SumcapError):
    pass
