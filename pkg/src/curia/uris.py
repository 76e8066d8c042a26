"""URI identity rules for curated items.

Items are identified by web URI. Two spellings of the same location must
collapse to one identity, otherwise a curator could be double counted by
listing trivial variants. Normalization is deliberately conservative:
scheme and host are case-insensitive per RFC 3986, default ports and a
trailing slash carry no meaning, but path and query case is preserved
because many hosts treat paths case-sensitively.
"""

from __future__ import annotations

from urllib.parse import urlsplit, urlunsplit

_DEFAULT_PORTS = {"http": 80, "https": 443, "ftp": 21}


def is_valid_item_uri(uri: str) -> bool:
    """True if ``uri`` is a syntactically plausible web identifier.

    Requires a scheme and at least a host or path, and rejects embedded
    whitespace and control characters. Non-hierarchical schemes such as
    doi: are accepted.
    """
    if not isinstance(uri, str) or not uri:
        return False
    if any(ch.isspace() or ord(ch) < 0x20 for ch in uri):
        return False
    try:
        parts = urlsplit(uri)
    except ValueError:
        return False
    if not parts.scheme:
        return False
    return bool(parts.netloc or parts.path)


def normalize_uri(uri: str) -> str:
    """Canonical form of an item URI used for all identity comparisons.

    Lowercases scheme and host, drops default ports and a single trailing
    slash on the path, and leaves path/query/fragment case untouched.
    """
    parts = urlsplit(uri)
    scheme = parts.scheme.lower()
    netloc = parts.netloc
    if netloc:
        host = parts.hostname or ""
        port = None
        try:
            port = parts.port
        except ValueError:
            # Malformed port survives as-is; identity is still deterministic.
            host = netloc.lower()
            port = None
            netloc = host
        else:
            if port is not None and _DEFAULT_PORTS.get(scheme) == port:
                port = None
            userinfo = ""
            if "@" in netloc:
                userinfo = netloc.rsplit("@", 1)[0] + "@"
            netloc = userinfo + host + (f":{port}" if port is not None else "")
    path = parts.path
    if path.endswith("/"):
        path = path[:-1]
    return urlunsplit((scheme, netloc, path, parts.query, parts.fragment))
