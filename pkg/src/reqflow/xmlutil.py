"""Minimal deterministic XML writer.

All documents this package emits must be byte-reproducible, so elements are
serialized with a fixed attribute order (insertion order of the attrs dict),
two-space indentation, LF line endings, and a single trailing newline.
Parsing uses xml.etree.ElementTree; only writing is hand-rolled.
"""

from __future__ import annotations

from typing import Mapping, Optional


def escape_text(value: str) -> str:
    return value.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def escape_attr(value: str) -> str:
    return escape_text(value).replace('"', "&quot;")


class XmlElement:
    """A writable element: fixed-order attributes, children or text."""

    def __init__(self, tag: str, attrs: Optional[Mapping[str, str]] = None,
                 text: Optional[str] = None):
        self.tag = tag
        self.attrs = dict(attrs or {})
        self.text = text
        self.children: list[XmlElement] = []

    def child(self, tag: str, attrs: Optional[Mapping[str, str]] = None,
              text: Optional[str] = None) -> "XmlElement":
        el = XmlElement(tag, attrs, text)
        self.children.append(el)
        return el

    def _render(self, lines: list[str], depth: int) -> None:
        pad = "  " * depth
        parts = [pad, "<", self.tag]
        for key, val in self.attrs.items():
            parts.append(f' {key}="{escape_attr(val)}"')
        if not self.children and self.text is None:
            parts.append("/>")
            lines.append("".join(parts))
            return
        if self.text is not None and not self.children:
            parts.append(">")
            parts.append(escape_text(self.text))
            parts.append(f"</{self.tag}>")
            lines.append("".join(parts))
            return
        parts.append(">")
        lines.append("".join(parts))
        for ch in self.children:
            ch._render(lines, depth + 1)
        lines.append(f"{pad}</{self.tag}>")


def render_document(root: XmlElement) -> str:
    lines = ['<?xml version="1.0" encoding="UTF-8"?>']
    root._render(lines, 0)
    return "\n".join(lines) + "\n"
