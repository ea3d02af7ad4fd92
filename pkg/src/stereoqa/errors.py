"""Exception hierarchy shared across the package."""


class StereoQAError(Exception):
    """Base class for all package errors."""


class InputError(StereoQAError):
    """Invalid or missing user input (files, config values, CLI arguments)."""


class ContractError(StereoQAError):
    """An internal consistency contract was violated (stale manifest, bad plan)."""


class WavFormatError(InputError):
    """The file is not a well-formed RIFF/WAVE container."""


class UnsupportedWavError(InputError):
    """The WAV file uses a codec or sample layout outside the supported set."""


class ChannelCountError(InputError):
    """More channels than the supported mono/stereo layouts."""
