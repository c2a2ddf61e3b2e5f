"""Literal text encoder: pretrained-transformer [CLS] vectors to LEB1 files."""

__version__ = "0.1.0"

from .encode import ClsEncoder, LiteralTextRecord, encode_literals, \
    read_text_file
from .leb import write_records
