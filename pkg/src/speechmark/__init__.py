"""Hide a short spoken secret inside a cover signal.

Pipeline: voice activity detection -> log amplitude normalization ->
blind multi-level QIM embedding in the upper spectral subband of the cover.
"""

from speechmark.audio_io import AudioClip, load_wav, save_wav
from speechmark.errors import SpeechmarkError

__version__ = "0.1.0"

__all__ = ["AudioClip", "load_wav", "save_wav", "SpeechmarkError", "__version__"]
