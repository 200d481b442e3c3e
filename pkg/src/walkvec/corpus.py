"""Text ingestion: streaming tokenizer and vocabulary.

Tokens are maximal ``[a-z]+`` runs of the lowercased input; every other
character (digits, punctuation, whitespace, markup) acts as a separator.
Files are streamed in chunks so corpora never need to fit in memory, with
letter-runs stitched across chunk boundaries.
"""

import codecs
import re
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, CorpusIOError

_TOKEN_RE = re.compile(r"[a-z]+")
_CHUNK_BYTES = 1 << 20


@dataclass(frozen=True)
class TokenizerConfig:
    """Tokenizer switches.

    Both default on; turning them off yields whitespace-ish splitting for
    callers that pre-clean their own text.
    """

    lowercase: bool = True
    strip_non_alpha: bool = True


def tokenize(text: str, config: TokenizerConfig = TokenizerConfig()):
    """Tokenize an in-memory string into a list of tokens."""
    if config.lowercase:
        text = text.lower()
    if config.strip_non_alpha:
        return _TOKEN_RE.findall(text)
    return text.split()


def iter_file_tokens(path, config: TokenizerConfig = TokenizerConfig()):
    """Yield tokens from a file, streaming in ~1 MiB chunks.

    Bytes that do not decode as UTF-8 are replaced (the replacement char
    is a token separator).  A token spanning a chunk boundary is carried
    over and emitted whole.  I/O failures raise CorpusIOError carrying the
    byte offset reached so far.
    """
    decoder = codecs.getincrementaldecoder("utf-8")("replace")
    carry = ""
    offset = 0
    try:
        fh = open(path, "rb")
    except OSError as exc:
        raise CorpusIOError(f"cannot open {path}: {exc.strerror or exc}") from exc
    with fh:
        while True:
            try:
                chunk = fh.read(_CHUNK_BYTES)
            except OSError as exc:
                raise CorpusIOError(
                    f"read error on {path}: {exc.strerror or exc}", byte_offset=offset
                ) from exc
            final = not chunk
            text = carry + decoder.decode(chunk, final)
            offset += len(chunk)
            if config.lowercase:
                text = text.lower()
            if config.strip_non_alpha:
                matches = _TOKEN_RE.findall(text)
            else:
                matches = text.split()
            # A trailing letter-run may continue in the next chunk; hold it.
            if not final and matches and text and _is_token_char(text[-1], config):
                carry = matches.pop()
            else:
                carry = ""
            yield from matches
            if final:
                return


def _is_token_char(ch: str, config: TokenizerConfig) -> bool:
    if config.strip_non_alpha:
        return "a" <= ch <= "z"
    return not ch.isspace()


def count_tokens(paths, config: TokenizerConfig = TokenizerConfig()) -> Counter:
    """Count token frequencies across one or more files."""
    counts: Counter = Counter()
    for path in paths:
        counts.update(iter_file_tokens(path, config))
    return counts


@dataclass
class Vocabulary:
    """Immutable token inventory with dense integer ids.

    Ids are assigned by descending corpus count, ties broken
    lexicographically, so id 0 is always the most frequent word and the
    ordering is independent of input file ordering.
    """

    words: list
    ids: dict = field(repr=False)
    counts: np.ndarray = field(repr=False)
    total_count: int = 0

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word) -> bool:
        return word in self.ids

    def id_of(self, word):
        return self.ids.get(word)

    def word_of(self, idx: int) -> str:
        return self.words[idx]


def build_vocabulary(source, min_count: int = 1, wordlist=None) -> Vocabulary:
    """Build a Vocabulary from a token iterable or a Counter.

    `min_count` drops rare words; `wordlist` (a set/sequence of words),
    when given, restricts the vocabulary to exactly those words that also
    survive `min_count`.  An empty result is a configuration error: every
    downstream stage needs at least one word.
    """
    counts = source if isinstance(source, Counter) else Counter(source)
    if wordlist is not None:
        keep = set(wordlist)
        items = [(w, c) for w, c in counts.items() if c >= min_count and w in keep]
    else:
        items = [(w, c) for w, c in counts.items() if c >= min_count]
    if not items:
        raise ConfigurationError(
            f"vocabulary is empty after applying min_count={min_count}"
            + ("" if wordlist is None else " and the word list")
        )
    items.sort(key=lambda wc: (-wc[1], wc[0]))
    words = [w for w, _ in items]
    ids = {w: i for i, w in enumerate(words)}
    arr = np.array([c for _, c in items], dtype=np.int64)
    return Vocabulary(words=words, ids=ids, counts=arr, total_count=int(arr.sum()))


def encode(tokens, vocab: Vocabulary) -> np.ndarray:
    """Map tokens to int32 ids, dropping out-of-vocabulary tokens.

    Dropping (rather than marking) OOV tokens means the survivors become
    adjacent: the pair stream downstream sees "a c" if "b" was dropped
    from "a b c".
    """
    ids = vocab.ids
    return np.array([ids[t] for t in tokens if t in ids], dtype=np.int32)


def iter_encoded_runs(paths, vocab: Vocabulary, config: TokenizerConfig = TokenizerConfig()):
    """Yield one encoded id array per input file (files never bridge)."""
    for path in paths:
        yield encode(iter_file_tokens(path, config), vocab)


def save_vocabulary(vocab: Vocabulary, path) -> None:
    """Write the vocabulary as tab-separated ``word<TAB>count`` lines.

    Line number (0-based) is the word id, so the file round-trips the id
    assignment exactly.
    """
    with open(path, "w", encoding="utf-8") as fh:
        for word, count in zip(vocab.words, vocab.counts):
            fh.write(f"{word}\t{int(count)}\n")


def load_vocabulary(path) -> Vocabulary:
    words = []
    counts = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise CorpusIOError(f"{path}:{lineno}: expected 'word<TAB>count', got {line!r}")
            word, count_s = parts
            if word in seen:
                raise CorpusIOError(f"{path}:{lineno}: duplicate word {word!r}")
            seen.add(word)
            try:
                count = int(count_s)
            except ValueError:
                raise CorpusIOError(f"{path}:{lineno}: count {count_s!r} is not an integer") from None
            words.append(word)
            counts.append(count)
    if not words:
        raise CorpusIOError(f"{path}: vocabulary file is empty")
    arr = np.array(counts, dtype=np.int64)
    return Vocabulary(
        words=words,
        ids={w: i for i, w in enumerate(words)},
        counts=arr,
        total_count=int(arr.sum()),
    )


def load_wordlist(path) -> set:
    """Read one word per line (``#`` comments and blank lines skipped)."""
    out = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.split("#", 1)[0].strip().lower()
            if word:
                out.add(word)
    return out
