"""Model bundle: configuration, vocabulary, and the parameter store.

Parameter names are stable strings; initialization draws each parameter
from its own named random stream, so adding or removing a parameter never
shifts the values of the others.
"""

import numpy as np

from .config import TrainConfig
from .data import Vocab
from .params import ParamStore, glorot_uniform, lstm_bias
from .rng import RngHub


class Model:
    def __init__(self, config: TrainConfig, vocab: Vocab, store: ParamStore, rngs: RngHub):
        self.config = config
        self.vocab = vocab
        self.store = store
        self.rngs = rngs

    # -- derived dimensions ------------------------------------------------

    @property
    def token_repr_dim(self) -> int:
        extra = self.config.char_filters if self.config.char_cnn else 0
        return self.config.token_emb_dim + extra

    @property
    def context_dim(self) -> int:
        return 2 * self.config.encoder_hidden

    @property
    def phrase_dim(self) -> int:
        return 3 * self.context_dim

    @property
    def segment_emb_dim(self) -> int:
        dim = 0
        if self.config.use_phrase:
            dim += self.phrase_dim
        if self.config.use_label:
            dim += self.config.label_emb_dim
        return dim

    @property
    def decoder_input_dim(self) -> int:
        return self.segment_emb_dim + self.phrase_dim

    # -- construction ------------------------------------------------------

    @classmethod
    def initialize(cls, config: TrainConfig, vocab: Vocab) -> "Model":
        config.validate()
        rngs = RngHub(config.seed)
        store = ParamStore(seed=config.seed)
        model = cls(config, vocab, store, rngs)

        def mat(name, shape):
            store.add(name, glorot_uniform(shape, rngs.stream(f"init/{name}")))

        def zeros(name, shape):
            store.add(name, np.zeros(shape))

        mat("token_emb", (vocab.n_tokens, config.token_emb_dim))
        if config.char_cnn:
            mat("char_emb", (vocab.n_chars, config.char_emb_dim))
            mat("char_conv_w", (config.char_filters, config.char_kernel, config.char_emb_dim))
            zeros("char_conv_b", (config.char_filters,))

        enc_h = config.encoder_hidden
        in_dim = model.token_repr_dim
        for layer in range(config.layers):
            for direction in ("fw", "bw"):
                mat(f"enc/{layer}/{direction}/w", (4 * enc_h, in_dim + enc_h))
                store.add(f"enc/{layer}/{direction}/b", lstm_bias(enc_h))
            in_dim = 2 * enc_h

        mat("label_emb", (vocab.n_labels, config.label_emb_dim))
        mat("seg_start", (model.segment_emb_dim,))

        dec_h = config.decoder_hidden
        dec_in = model.decoder_input_dim
        if config.decoder == "lstm":
            layer_in = dec_in
            for layer in range(config.layers):
                mat(f"dec/{layer}/w", (4 * dec_h, layer_in + dec_h))
                store.add(f"dec/{layer}/b", lstm_bias(dec_h))
                layer_in = dec_h
        else:
            mat("dec/mlp/w1", (dec_h, dec_in))
            zeros("dec/mlp/b1", (dec_h,))
            mat("dec/mlp/w2", (dec_h, dec_h))
            zeros("dec/mlp/b2", (dec_h,))

        mat("span_weight", (dec_h, model.phrase_dim))
        mat("label_weight", (config.label_emb_dim, model.phrase_dim + dec_h))

        if config.embeddings_path:
            load_pretrained_rows(store["token_emb"].data, config.embeddings_path, vocab, config.token_emb_dim)
        return model

    def with_store(self, store: ParamStore) -> "Model":
        """Same config/vocab over a different (e.g. reloaded) parameter store."""
        return Model(self.config, self.vocab, store, self.rngs)


def load_pretrained_rows(emb: np.ndarray, path, vocab: Vocab, dim: int):
    """Overwrite embedding rows for tokens present in a text vector file.

    Format: one token per line followed by its whitespace-separated values.
    """
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            fields = line.rstrip("\n").split()
            if not fields:
                continue
            token, values = fields[0], fields[1:]
            if len(values) != dim:
                raise ValueError(
                    f"{path}: line {lineno}: expected {dim} values for {token!r}, got {len(values)}"
                )
            tid = vocab.token_id(token)
            if tid > 1:
                emb[tid] = np.array([float(v) for v in values])
