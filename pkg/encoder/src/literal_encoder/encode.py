"""Batch-encode literal texts into [CLS] vectors with a BERT-style encoder.

Each text is wrapped in [CLS] ... [SEP], tokenized, truncated, and run
through the pretrained encoder in inference mode with all segment ids set
to zero; the final-layer hidden vector at the [CLS] position is the
literal's embedding.  Batches are formed in a fixed sort-by-length order
and padding is masked, so batch composition cannot change the outputs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import torch
from transformers import AutoModel, AutoTokenizer

logger = logging.getLogger(__name__)

__all__ = ["LiteralTextRecord", "read_text_file", "ClsEncoder",
           "encode_literals"]

KINDS = {"E": "entity", "R": "relation"}


@dataclass(frozen=True)
class LiteralTextRecord:
    kind: str  # "entity" | "relation"
    name: str
    text: str


def read_text_file(path):
    """Parse the input TSV: ``E|R <TAB> name <TAB> text`` (\\t escaped).

    Returns (records, skipped_empty, duplicates); duplicate (kind, name)
    pairs keep the last occurrence.
    """
    seen = {}
    order = []
    skipped = 0
    duplicates = 0
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 tab-separated fields")
            kind_s, name, text = parts
            if kind_s not in KINDS:
                raise ValueError(f"{path}:{lineno}: kind must be E or R")
            if not name:
                raise ValueError(f"{path}:{lineno}: empty name")
            text = text.replace("\\t", "\t")
            if not text.strip():
                skipped += 1
                continue
            key = (KINDS[kind_s], name)
            if key in seen:
                duplicates += 1
                logger.warning("%s:%d: duplicate record %s, keeping last",
                               path, lineno, key)
            else:
                order.append(key)
            seen[key] = LiteralTextRecord(KINDS[kind_s], name, text)
    return [seen[k] for k in order], skipped, duplicates


class ClsEncoder:
    """Deterministic [CLS]-vector extraction from a pretrained encoder."""

    def __init__(self, checkpoint: str, max_tokens: int = 512,
                 device: str = "cpu"):
        self.tokenizer = AutoTokenizer.from_pretrained(checkpoint)
        self.model = AutoModel.from_pretrained(checkpoint)
        self.model.eval()  # no dropout: same text always maps to the same vector
        self.device = torch.device(device)
        self.model.to(self.device)
        self.max_tokens = max_tokens
        self.hidden_size = self.model.config.hidden_size

    def _token_ids(self, text: str):
        ids = self.tokenizer.encode(text, add_special_tokens=True,
                                    truncation=True,
                                    max_length=self.max_tokens)
        return ids

    @torch.no_grad()
    def encode(self, texts, batch_size: int = 32) -> np.ndarray:
        """Encode texts to (n, hidden_size) float32 [CLS] vectors."""
        token_ids = [self._token_ids(t) for t in texts]
        # fixed order: longest first, ties by original position
        order = sorted(range(len(texts)), key=lambda i: (-len(token_ids[i]), i))
        out = np.zeros((len(texts), self.hidden_size), dtype=np.float32)
        pad_id = self.tokenizer.pad_token_id or 0
        for start in range(0, len(order), batch_size):
            chunk = order[start:start + batch_size]
            width = max(len(token_ids[i]) for i in chunk)
            ids = torch.full((len(chunk), width), pad_id, dtype=torch.long)
            mask = torch.zeros((len(chunk), width), dtype=torch.long)
            for row, i in enumerate(chunk):
                n = len(token_ids[i])
                ids[row, :n] = torch.tensor(token_ids[i], dtype=torch.long)
                mask[row, :n] = 1
            segments = torch.zeros_like(ids)
            result = self.model(input_ids=ids.to(self.device),
                                attention_mask=mask.to(self.device),
                                token_type_ids=segments.to(self.device))
            cls = result.last_hidden_state[:, 0, :].cpu().numpy()
            for row, i in enumerate(chunk):
                out[i] = cls[row]
        return out


def encode_literals(text_file, checkpoint: str, max_tokens: int,
                    out_path, batch_size: int = 32, device: str = "cpu"):
    """End-to-end export: text TSV in, LEB1 binary out. Returns a summary."""
    from .leb import write_records

    records, skipped, duplicates = read_text_file(text_file)
    encoder = ClsEncoder(checkpoint, max_tokens=max_tokens, device=device)
    vectors = encoder.encode([r.text for r in records], batch_size=batch_size)
    write_records(out_path,
                  [(r.kind, r.name, vectors[i]) for i, r in enumerate(records)],
                  encoder.hidden_size)
    summary = {"written": len(records), "skipped_empty": skipped,
               "duplicates": duplicates, "dim": encoder.hidden_size,
               "entities": sum(r.kind == "entity" for r in records),
               "relations": sum(r.kind == "relation" for r in records)}
    logger.info("encoded %d literals (dim %d, %d skipped, %d duplicates)",
                summary["written"], summary["dim"], skipped, duplicates)
    return summary
