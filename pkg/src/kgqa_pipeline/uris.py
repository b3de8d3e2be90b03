"""The single shared entity-URI pattern.

An entity reference is an angle-bracketed absolute URI: ``<scheme://body>``
with no internal whitespace. Every module that touches entity lists
(dataset validation, grounding, sanitation) matches against this one
definition so they can never drift apart.
"""

from __future__ import annotations

import re

# scheme per RFC 3986, then "://", then any non-space, non-bracket body
ENTITY_URI_RE = re.compile(r"^<[A-Za-z][A-Za-z0-9+.\-]*://[^\s<>]+>$")

# same thing without the brackets, for text between a matched < and >
URI_BODY_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*://[^\s<>]+$")


def is_entity_uri(value: str) -> bool:
    return bool(ENTITY_URI_RE.match(value))
