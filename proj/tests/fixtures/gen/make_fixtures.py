#!/usr/bin/env python3
"""Regenerates the frozen test fixtures under tests/fixtures/.

Everything written here is produced by independent reference implementations
(HuggingFace `tokenizers`, PyTorch `transformers`, `sacrebleu`) and consumed by
the C++ tests as expected values. Run from the repository root:

    python3 tests/fixtures/gen/make_fixtures.py

Requires: torch, transformers, tokenizers, safetensors, sacrebleu.
"""

import hashlib
import json
import os
import random
import shutil
import sys

import torch
from safetensors.torch import save_file
from sacrebleu.tokenizers.tokenizer_13a import Tokenizer13a
from tokenizers import Tokenizer, decoders, models, normalizers, pre_tokenizers, processors, trainers
from transformers import (BertConfig, BertForSequenceClassification, BertModel, RobertaConfig,
                          RobertaForSequenceClassification, RobertaModel)

ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
DATA = os.path.join(ROOT, "data")
ORACLE = os.path.join(ROOT, "oracle")
BUNDLES = os.path.join(ROOT, "bundles")

CORPUS = [
    "The quick brown fox jumps over the lazy dog.",
    "A man is playing a guitar on the street.",
    "Stocks fell sharply on Monday after the report.",
    "She doesn't like the cold weather in winter.",
    "They're going to the market to buy fresh fish and vegetables.",
    "Résumé writing is an art; naïve approaches fail.",
    "The café on the corner serves excellent coffee!",
    "How do I learn to cook rice without burning it?",
    "What is the capital of France, and why is it famous?",
    "Heavy rain caused flooding in several towns along the river.",
    "The committee approved the budget by a narrow margin of 51-49.",
    "Numbers like 3.14 and 1,000,000 appear in the text.",
    "Email me at someone@example.com or call 555-0100.",
    "The children played football in the park until sunset.",
    "Scientists discovered a new species of frog in the rainforest.",
    "He said: \"I'll be there at 5 o'clock.\"",
    "我们 love 中文 characters mixed with English words.",
    "Tabs\tand\nnewlines   should collapse.",
]


def fingerprint(bundle_dir, graph_name):
    h = hashlib.sha256()
    for name in (graph_name, "tokenizer.json", "bundle.json"):
        with open(os.path.join(bundle_dir, name), "rb") as f:
            h.update(f.read())
    return h.hexdigest()


def write_bundle(name, config, graph_name, graph_writer, tokenizer):
    out = os.path.join(BUNDLES, name)
    shutil.rmtree(out, ignore_errors=True)
    os.makedirs(out)
    graph_writer(os.path.join(out, graph_name))
    tokenizer.save(os.path.join(out, "tokenizer.json"))
    config = dict(config)
    config["graph"] = graph_name
    with open(os.path.join(out, "bundle.json"), "w") as f:
        json.dump(config, f, indent=2, sort_keys=True)
        f.write("\n")
    with open(os.path.join(out, "fingerprint.txt"), "w") as f:
        f.write(fingerprint(out, graph_name) + "\n")
    return out


def data_sentences():
    texts = []
    for fname in sorted(os.listdir(DATA)):
        path = os.path.join(DATA, fname)
        if fname.endswith(".jsonl"):
            with open(path) as f:
                for line in f:
                    rec = json.loads(line)
                    texts += [rec["text_a"], rec["text_b"]]
            continue
        with open(path) as f:
            for line in f:
                texts += [c for c in line.rstrip("\n").replace(",", "\t").split("\t")]
    return texts


# --------------------------------------------------------------------------------------
# BLEU tokenizer oracle (13a, as used by the sentence-level BLEU in common tooling)


def bleu_tokenize_oracle():
    rng = random.Random(1234)
    fixed = [
        "Hello, world",
        "a b  c",
        "don't",
        "I can't believe it's not butter!",
        "3.5 million, or 3,500,000 people.",
        "Pages 10-20 and items a-b.",
        "End of sentence. Start of next",
        "...wait...",
        "x,y,z",
        "1.2.3",
        "&quot;quoted&quot; &amp; &lt;tag&gt;",
        "line one-\nline two\nline three",
        "<skipped> token removed",
        "{braces} [brackets] (parens) <angles>",
        "path/to/file.txt",
        "email@example.com",
        "$100 ~ 50% ^caret `tick` |pipe| \\back",
        "Ünïcödé, wörds. ok",
        "non breaking space",
        "tab\tseparated\ttokens",
        "em—dash and “curly quotes”",
        "trailing period.",
        ".leading period",
        "9-5 shift, 24-7 service",
        "A.B.C. initials",
        "comma,then,words 1,2 3, 4 ,5",
        "'single quotes' and \"double\"",
        "question? exclaim! semi; colon:",
        "under_score and hy-phen",
        "   leading and trailing   ",
    ]
    alphabet = list("abcXYZ019 .,-'\"!?;:/&()[]{}<>@#$%^*_+=~`|\\") + ["é", " ", "\n", "\t", "中"]
    strings = list(fixed)
    while len(strings) < 100:
        n = rng.randint(1, 24)
        s = "".join(rng.choice(alphabet) for _ in range(n))
        if s.strip():
            strings.append(s)
    tok = Tokenizer13a()
    cases = [{"text": s, "tokens": tok(s).split()} for s in strings]
    with open(os.path.join(ORACLE, "bleu_tokenize_13a.json"), "w") as f:
        json.dump(cases, f, indent=1, ensure_ascii=False)
        f.write("\n")

def sentence_bleu_oracle():
    """Unsmoothed order-4 sentence BLEU from sacrebleu on perturbed sentence pairs."""
    import logging

    from sacrebleu.metrics import BLEU

    logging.getLogger("sacrebleu").setLevel(logging.ERROR)

    rng = random.Random(4321)
    words = ("the a cat dog sat on mat red blue car stopped quickly , . ! ? it's don't "
             "3.5 10-20 birds sing at dawn over under house tree").split()
    bleu = BLEU(smooth_method="none", effective_order=False, tokenize="13a")
    cases = []
    while len(cases) < 200:
        ref = [rng.choice(words) for _ in range(rng.randint(1, 18))]
        hyp = list(ref)
        for _ in range(rng.randint(0, 4)):
            op = rng.randrange(3)
            if op == 0 and hyp:
                del hyp[rng.randrange(len(hyp))]
            elif op == 1:
                hyp.insert(rng.randint(0, len(hyp)), rng.choice(words))
            elif hyp:
                hyp[rng.randrange(len(hyp))] = rng.choice(words)
        if not hyp:
            continue
        reference, candidate = " ".join(ref), " ".join(hyp)
        result = bleu.sentence_score(candidate, [reference])
        cases.append({"reference": reference, "candidate": candidate, "bleu": result.score / 100.0})
    with open(os.path.join(ORACLE, "bleu_sentence_sacrebleu.json"), "w") as f:
        json.dump(cases, f, indent=1, ensure_ascii=False)
        f.write("\n")



# --------------------------------------------------------------------------------------
# Tokenizers


def train_wordpiece(texts):
    tok = Tokenizer(models.WordPiece(unk_token="[UNK]", max_input_chars_per_word=100))
    tok.normalizer = normalizers.BertNormalizer(clean_text=True, handle_chinese_chars=True,
                                                strip_accents=None, lowercase=True)
    tok.pre_tokenizer = pre_tokenizers.BertPreTokenizer()
    tok.decoder = decoders.WordPiece(prefix="##")
    trainer = trainers.WordPieceTrainer(vocab_size=420,
                                        special_tokens=["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"])
    tok.train_from_iterator(texts, trainer)
    cls, sep = tok.token_to_id("[CLS]"), tok.token_to_id("[SEP]")
    tok.post_processor = processors.TemplateProcessing(
        single="[CLS] $A [SEP]", pair="[CLS] $A [SEP] $B:1 [SEP]:1",
        special_tokens=[("[CLS]", cls), ("[SEP]", sep)])
    return tok


def train_bytelevel_bpe(texts):
    tok = Tokenizer(models.BPE())
    tok.pre_tokenizer = pre_tokenizers.ByteLevel(add_prefix_space=False)
    tok.decoder = decoders.ByteLevel()
    trainer = trainers.BpeTrainer(vocab_size=520,
                                  special_tokens=["<s>", "<pad>", "</s>", "<unk>", "<mask>"],
                                  initial_alphabet=pre_tokenizers.ByteLevel.alphabet())
    tok.train_from_iterator(texts, trainer)
    tok.post_processor = processors.RobertaProcessing(("</s>", tok.token_to_id("</s>")),
                                                      ("<s>", tok.token_to_id("<s>")))
    return tok


def word_level(texts):
    words = set()
    for t in texts:
        words.update(t.split())
    vocab = {"[PAD]": 0, "[UNK]": 1, "[CLS]": 2, "[SEP]": 3}
    for w in sorted(words):
        vocab.setdefault(w, len(vocab))
    tok = Tokenizer(models.WordLevel(vocab, unk_token="[UNK]"))
    tok.pre_tokenizer = pre_tokenizers.WhitespaceSplit()
    tok.post_processor = processors.TemplateProcessing(
        single="[CLS] $A [SEP]", pair="[CLS] $A [SEP] $B:1 [SEP]:1",
        special_tokens=[("[CLS]", 2), ("[SEP]", 3)])
    tok.decoder = decoders.WordPiece(prefix="##", cleanup=False)
    return tok


TOKENIZER_PROBES = [
    "Hello, world!",
    "The quick brown fox jumps over the lazy dog.",
    "RÉSUMÉ of a naïve café owner",
    "don't stop believing, they're here",
    "我们 love 中文",
    "  multiple   spaces\tand\ttabs\n",
    "Numbers 3.14 and 1,000,000 and 555-0100",
    "unseen zyxwvut qqqq words",
    "emoji \U0001F600 and symbols © ™",
    "a",
    "!!!???",
    "hyphen-ated and under_score",
    "x" * 150,
    "It's 5 o'clock—time for tea.",
    "Zero​width and soft­hyphen",
    "control\u0007char",
    "  leading space",
    "trailing space  ",
    "multiple\n\nnewlines\n\n\nhere",
    "'s 've 're 'll 'd 'm 't",
    "The senate passed the new budget <mask> today",
]

PAIR_PROBES = [
    ("A man is playing a guitar.", "A man plays the guitar."),
    ("Stocks fell sharply on Monday.", "Markets dropped steeply on Monday."),
    ("a", "b"),
    (" ".join(["word"] * 80), "short text"),
    ("short text", " ".join(["guitar"] * 80)),
    (" ".join(["alpha"] * 40), " ".join(["beta"] * 40)),
]


def tokenizer_oracle(name, tok, max_len):
    tok.no_padding()
    tok.enable_truncation(max_len, strategy="longest_first")
    singles = []
    for s in TOKENIZER_PROBES:
        e = tok.encode(s)
        singles.append({"text": s, "ids": e.ids, "special": e.special_tokens_mask, "type_ids": e.type_ids})
    pairs = []
    for a, b in PAIR_PROBES:
        e = tok.encode(a, b)
        pairs.append({"text_a": a, "text_b": b, "ids": e.ids, "special": e.special_tokens_mask,
                      "type_ids": e.type_ids})
    tok.no_truncation()
    decoded = []
    for s in TOKENIZER_PROBES[:8]:
        e = tok.encode(s, add_special_tokens=False)
        decoded.append({"ids": e.ids, "text": tok.decode(e.ids)})
    with open(os.path.join(ORACLE, f"tokenizer_{name}.json"), "w") as f:
        json.dump({"max_len": max_len, "singles": singles, "pairs": pairs, "decoded": decoded}, f,
                  indent=1, ensure_ascii=False)
        f.write("\n")


# --------------------------------------------------------------------------------------
# Tiny transformer bundles


def arch_of(cfg, family):
    return {
        "family": family,
        "hidden_size": cfg.hidden_size,
        "num_layers": cfg.num_hidden_layers,
        "num_heads": cfg.num_attention_heads,
        "intermediate_size": cfg.intermediate_size,
        "max_position_embeddings": cfg.max_position_embeddings,
        "type_vocab_size": cfg.type_vocab_size,
        "layer_norm_eps": cfg.layer_norm_eps,
        "pad_token_id": cfg.pad_token_id,
        "hidden_act": cfg.hidden_act,
        "vocab_size": cfg.vocab_size,
    }


def save_weights(model):
    def writer(path):
        sd = {k: v.detach().contiguous().clone() for k, v in model.state_dict().items()
              if v.dtype.is_floating_point}
        save_file(sd, path)
    return writer


def model_inputs(tok, a, b=None):
    e = tok.encode(a, b) if b is not None else tok.encode(a)
    ids = torch.tensor([e.ids])
    mask = torch.ones_like(ids)
    types = torch.tensor([e.type_ids])
    return e, ids, mask, types


def tiny_models(wp_tok, bpe_tok):
    torch.manual_seed(7)
    expected = {}
    max_len = 64
    wp_tok.enable_truncation(max_len, strategy="longest_first")
    bpe_tok.enable_truncation(max_len, strategy="longest_first")

    bert_cfg = BertConfig(vocab_size=wp_tok.get_vocab_size(), hidden_size=32, num_hidden_layers=2,
                          num_attention_heads=4, intermediate_size=64, max_position_embeddings=64,
                          type_vocab_size=2, initializer_range=0.25, pad_token_id=0, num_labels=1,
                          hidden_act="gelu")
    rob_cfg = RobertaConfig(vocab_size=bpe_tok.get_vocab_size(), hidden_size=32, num_hidden_layers=2,
                            num_attention_heads=4, intermediate_size=64, max_position_embeddings=66,
                            type_vocab_size=1, initializer_range=0.25, pad_token_id=1,
                            bos_token_id=0, eos_token_id=2, num_labels=1, hidden_act="gelu")

    def randomize(model):
        # LayerNorm weights default to exactly one; perturb everything so tests see real mixing.
        with torch.no_grad():
            for p in model.parameters():
                p.add_(torch.randn_like(p) * 0.1)
        return model.eval()

    reg_models = {
        "tiny-bert-sts": ("bert", bert_cfg, randomize(BertForSequenceClassification(bert_cfg)), wp_tok),
        "tiny-roberta-sts": ("roberta", rob_cfg, randomize(RobertaForSequenceClassification(rob_cfg)), bpe_tok),
    }
    for name, (family, cfg, model, tok) in reg_models.items():
        config = {
            "format_version": 1, "kind": "regression_pair", "runtime": "transformer", "max_len": max_len,
            "pooling": "none", "output_scale": 5.0, "rescale_baseline": None, "embedding_layer": "last",
            "idf": False, "architecture": arch_of(cfg, family), "head": "sequence_regression",
            "checkpoint": f"random-init/{name}",
        }
        write_bundle(name, config, "model.safetensors", save_weights(model), tok)
        cases = []
        with torch.no_grad():
            for a, b in PAIR_PROBES:
                e, ids, mask, types = model_inputs(tok, a, b)
                kwargs = {"input_ids": ids, "attention_mask": mask}
                if family == "bert":
                    kwargs["token_type_ids"] = types
                logit = model(**kwargs).logits.item()
                cases.append({"text_a": a, "text_b": b, "ids": e.ids, "logit": logit})
        expected[name] = {"kind": "regression_pair", "pairs": cases}

    enc_models = {
        "tiny-minilm": ("bert", bert_cfg, randomize(BertModel(bert_cfg, add_pooling_layer=False)), wp_tok, "last"),
        "tiny-roberta-enc": ("roberta", rob_cfg, randomize(RobertaModel(rob_cfg, add_pooling_layer=False)), bpe_tok, 1),
    }
    texts = ["A man is playing a guitar.", "Stocks fell sharply on Monday.", "a",
             "The café on the corner serves excellent coffee!", " ".join(["word"] * 90)]
    for name, (family, cfg, model, tok, layer) in enc_models.items():
        config = {
            "format_version": 1, "kind": "encoder", "runtime": "transformer", "max_len": max_len,
            "pooling": "mean", "output_scale": 1.0, "rescale_baseline": None, "embedding_layer": layer,
            "idf": False, "architecture": arch_of(cfg, family), "head": "none",
            "checkpoint": f"random-init/{name}",
        }
        write_bundle(name, config, "model.safetensors", save_weights(model), tok)
        cases = []
        with torch.no_grad():
            for t in texts:
                e, ids, mask, types = model_inputs(tok, t)
                kwargs = {"input_ids": ids, "attention_mask": mask, "output_hidden_states": True}
                if family == "bert":
                    kwargs["token_type_ids"] = types
                hs = model(**kwargs).hidden_states
                cases.append({"text": t, "ids": e.ids, "special": e.special_tokens_mask,
                              "hidden_states": [h[0].tolist() for h in hs]})
        expected[name] = {"kind": "encoder", "embedding_layer": layer, "texts": cases}

    with open(os.path.join(ORACLE, "transformer_expected.json"), "w") as f:
        json.dump(expected, f, ensure_ascii=False)
        f.write("\n")


# --------------------------------------------------------------------------------------
# Fixture-runtime bundles (no neural network; deterministic stand-ins)


def fixture_bundles(texts):
    tok = word_level(texts + ["x y z up down left right north south"])

    def fixture_writer(content):
        def writer(path):
            with open(path, "w") as f:
                json.dump(content, f, indent=2, sort_keys=True)
                f.write("\n")
        return writer

    base_reg = {"format_version": 1, "kind": "regression_pair", "runtime": "fixture", "max_len": 32,
                "pooling": "none", "output_scale": 5.0, "rescale_baseline": None,
                "embedding_layer": "last", "idf": False}
    base_enc = dict(base_reg, kind="encoder", pooling="mean", output_scale=1.0)

    write_bundle("fixture-sts-constant", base_reg, "fixture.json",
                 fixture_writer({"regression": {"mode": "constant", "logit": 2.5}}), tok)
    write_bundle("fixture-sts-overlap", base_reg, "fixture.json",
                 fixture_writer({"regression": {"mode": "overlap", "scale": 5.0}}), tok)
    write_bundle("fixture-sts-hash", base_reg, "fixture.json",
                 fixture_writer({"regression": {"mode": "hash", "min": -1.0, "max": 6.0}}), tok)
    write_bundle("fixture-encoder", base_enc, "fixture.json",
                 fixture_writer({"encoder": {"mode": "orthonormal"}}), tok)
    vec = {"up": [1.0, 0.0], "down": [-1.0, 0.0], "left": [0.0, 1.0], "right": [0.0, -1.0],
           "north": [1.0, 0.0], "south": [-1.0, 0.0]}
    write_bundle("fixture-encoder-signed", base_enc, "fixture.json",
                 fixture_writer({"encoder": {"mode": "orthonormal", "dim": 2, "vectors": vec}}), tok)
    write_bundle("fixture-bertscore-baseline", dict(base_enc, rescale_baseline=0.8), "fixture.json",
                 fixture_writer({"encoder": {"mode": "orthonormal"}}), tok)


def main():
    os.makedirs(ORACLE, exist_ok=True)
    os.makedirs(BUNDLES, exist_ok=True)
    texts = data_sentences()
    bleu_tokenize_oracle()
    sentence_bleu_oracle()
    wp = train_wordpiece(CORPUS + texts)
    bpe = train_bytelevel_bpe(CORPUS + texts)
    tokenizer_oracle("wordpiece", wp, 24)
    tokenizer_oracle("bytelevel_bpe", bpe, 24)
    tiny_models(wp, bpe)
    fixture_bundles(texts)
    print("fixtures written to", ROOT)


if __name__ == "__main__":
    sys.exit(main())
