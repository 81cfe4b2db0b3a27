"""Exception hierarchy shared by every stage of the pipeline."""


class SpeechmarkError(Exception):
    """Base class for all library errors."""


# audio-io
class MalformedContainer(SpeechmarkError):
    pass


class UnsupportedFormat(SpeechmarkError):
    pass


class IoFailure(SpeechmarkError):
    pass


# dsp-core
class NonPowerOfTwoLength(SpeechmarkError, ValueError):
    pass


class AllZeroFrame(SpeechmarkError, ValueError):
    pass


# vad
class FrameTooShort(SpeechmarkError, ValueError):
    pass


class NoFrames(SpeechmarkError):
    pass


class NoVoicedSpeech(SpeechmarkError):
    pass


# pitch
class BandEmpty(SpeechmarkError, ValueError):
    pass


# normalize
class SilentInput(SpeechmarkError):
    pass


class DegenerateCoefficient(SpeechmarkError, ValueError):
    pass


# watermark
class WatermarkError(SpeechmarkError):
    """Raised when a stego signal cannot yield a valid payload."""


class BadMagic(WatermarkError):
    pass


class CrcMismatch(WatermarkError):
    pass


class TruncatedStego(WatermarkError):
    pass


class PayloadTooLarge(SpeechmarkError):
    pass


class ClampViolation(SpeechmarkError):
    """The final [-1, 1] clamp destroyed an embedded value; lower delta or cover level."""


# metrics / synth
class LengthMismatch(SpeechmarkError, ValueError):
    pass


class InvalidReference(SpeechmarkError, ValueError):
    pass


class AliasedHarmonics(SpeechmarkError, ValueError):
    pass
