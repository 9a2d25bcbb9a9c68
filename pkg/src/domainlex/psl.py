"""Public suffix list parsing and effective second-level domain extraction.

The rule file uses the ``effective_tld_names.dat`` layout: ``//`` comments,
one rule per line, ``!`` marks an exception and ``*`` a wildcard label.
Rules are kept in their literal form and, for non-ASCII rules, also in their
IDNA (punycode) form so that punycoded hostnames match without decoding them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from encodings import idna
from urllib.parse import urlsplit

__all__ = [
    "PslParseError",
    "NoRegistrableDomain",
    "SuffixRuleSet",
    "DomainName",
    "parse_psl",
    "extract_hostname",
    "effective_2ld",
]

_PRIVATE_BEGIN = "===BEGIN PRIVATE DOMAINS==="
_PRIVATE_END = "===END PRIVATE DOMAINS==="
_SCHEME = re.compile(r"^[a-zA-Z][a-zA-Z0-9+.-]*://")

Labels = tuple[str, ...]


class PslParseError(ValueError):
    """A rule line in a suffix list could not be parsed."""

    def __init__(self, lineno: int, line: str, reason: str):
        super().__init__(f"line {lineno}: {reason}: {line!r}")
        self.lineno = lineno


class NoRegistrableDomain(ValueError):
    """The hostname has no label to the left of its public suffix."""


@dataclass(frozen=True)
class SuffixRuleSet:
    exact_rules: frozenset[Labels]
    wildcard_rules: frozenset[Labels]
    exception_rules: frozenset[Labels]
    source_version: str = ""

    def __len__(self) -> int:
        return len(self.exact_rules) + len(self.wildcard_rules) + len(self.exception_rules)


@dataclass(frozen=True)
class DomainName:
    core: str
    tld: str

    @property
    def e2ld(self) -> str:
        return f"{self.core}.{self.tld}"


def _punycode(labels: Labels) -> Labels | None:
    try:
        out = tuple(lab if lab.isascii() else idna.ToASCII(lab).decode("ascii") for lab in labels)
    except UnicodeError:
        return None
    return out if out != labels else None


def parse_psl(text: str, include_private: bool = True, source_version: str = "") -> SuffixRuleSet:
    """Parse suffix-list text into exact, wildcard and exception rules.

    Parameters
    ----------
    text : str
        Content of a suffix-list file.
    include_private : bool
        Keep rules from the ``PRIVATE DOMAINS`` section.
    source_version : str
        Free-text provenance stored on the result.
    """
    exact: set[Labels] = set()
    wild: set[Labels] = set()
    exc: set[Labels] = set()
    in_private = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("//"):
            if _PRIVATE_BEGIN in line:
                in_private = True
            elif _PRIVATE_END in line:
                in_private = False
            continue
        if in_private and not include_private:
            continue
        if any(ch.isspace() for ch in line):
            raise PslParseError(lineno, raw, "embedded whitespace")
        is_exception = line.startswith("!")
        body = line[1:] if is_exception else line
        labels = tuple(body.lower().split("."))
        if any(not lab for lab in labels):
            raise PslParseError(lineno, raw, "empty label")
        if "*" in labels[1:] or any("*" in lab and lab != "*" for lab in labels):
            raise PslParseError(lineno, raw, "wildcard only allowed as leftmost label")
        if is_exception and labels[0] == "*":
            raise PslParseError(lineno, raw, "exception rule cannot be a wildcard")
        target = exc if is_exception else wild if labels[0] == "*" else exact
        target.add(labels)
        alt = _punycode(labels)
        if alt is not None:
            target.add(alt)
    # an exception always wins over an exact rule for the same name
    exact -= exc
    return SuffixRuleSet(frozenset(exact), frozenset(wild), frozenset(exc), source_version)


def extract_hostname(url_or_host: str) -> str:
    """Return the lowercased host of a URL, or the input itself if already a host."""
    s = url_or_host.strip()
    if not s:
        raise ValueError("empty input")
    if "/" not in s and "@" not in s and ":" not in s:
        host = s
    else:
        if not _SCHEME.match(s):
            s = "//" + s.lstrip("/")
        try:
            host = urlsplit(s).hostname or ""
        except ValueError as exc:
            raise ValueError(f"no host component in {url_or_host!r}") from exc
    host = host.lower().rstrip(".")
    if not host:
        raise ValueError(f"no host component in {url_or_host!r}")
    return host


def _public_suffix_len(labels: list[str], rules: SuffixRuleSet) -> int:
    n = len(labels)
    best = 1  # implicit "*" rule
    for k in range(n, 0, -1):
        cand = tuple(labels[n - k:])
        if cand in rules.exception_rules:
            return k - 1
        if best == 1 and (cand in rules.exact_rules or ("*",) + cand[1:] in rules.wildcard_rules):
            best = k
    return best


def effective_2ld(hostname: str, rules: SuffixRuleSet) -> DomainName:
    """Split a hostname into its registrable core label and public suffix.

    Raises ``NoRegistrableDomain`` when the hostname is itself a public suffix
    and ``ValueError`` for empty labels.
    """
    labels = hostname.lower().split(".")
    if any(not lab for lab in labels):
        raise ValueError(f"empty label in {hostname!r}")
    k = _public_suffix_len(labels, rules)
    if k >= len(labels):
        raise NoRegistrableDomain(f"{hostname!r} is a public suffix")
    return DomainName(core=labels[-k - 1], tld=".".join(labels[-k:]))
