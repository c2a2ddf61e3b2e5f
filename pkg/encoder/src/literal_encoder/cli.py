"""CLI for exporting literal embeddings."""

from __future__ import annotations

import json
import logging
import sys

import click

from .encode import encode_literals


@click.command()
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True), help="TSV of kind/name/text rows")
@click.option("--output", "output_path", required=True, type=click.Path())
@click.option("--model", default="bert-base-uncased", show_default=True,
              help="pretrained checkpoint name or local path")
@click.option("--max-tokens", default=512, show_default=True)
@click.option("--batch-size", default=32, show_default=True)
@click.option("--device", default="cpu", show_default=True)
def main(input_path, output_path, model, max_tokens, batch_size, device):
    """Encode literal texts to [CLS] vectors in the LEB1 binary format."""
    logging.basicConfig(level=logging.INFO)
    summary = encode_literals(input_path, model, max_tokens, output_path,
                              batch_size=batch_size, device=device)
    click.echo(json.dumps(summary, sort_keys=True))


if __name__ == "__main__":
    sys.exit(main())
