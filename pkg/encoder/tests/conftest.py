import pytest
import torch
from transformers import BertConfig, BertModel, BertTokenizer

VOCAB = """[PAD]
[UNK]
[CLS]
[SEP]
[MASK]
a
stack
is
last
in
first
out
structure
queue
the
tree
graph
##s
data
hash
table
list
linked
node
sort
search
"""


@pytest.fixture(scope="session")
def mini_checkpoint(tmp_path_factory):
    """Small random-weight BERT saved locally; stands in for a real
    pretrained checkpoint so the pipeline is testable offline."""
    d = tmp_path_factory.mktemp("minibert")
    vocab_file = d / "vocab.txt"
    vocab_file.write_text(VOCAB, encoding="utf-8")
    tokenizer = BertTokenizer(str(vocab_file))
    tokenizer.save_pretrained(str(d))
    torch.manual_seed(0)
    config = BertConfig(vocab_size=tokenizer.vocab_size, hidden_size=32,
                        num_hidden_layers=2, num_attention_heads=4,
                        intermediate_size=64, max_position_embeddings=64)
    BertModel(config).save_pretrained(str(d))
    return str(d)
