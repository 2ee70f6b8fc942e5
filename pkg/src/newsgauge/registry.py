"""Feature registry: the ordered manifest behind every feature vector.

The registry is data-driven. The shipped default has five groups sized
20/57/72/26/21; two tag names (SYM, SPACE) legitimately occur in both the
coarse and fine tag inventories, so the 196 group entries resolve to 194
distinct vector slots. A slot shared between groups accrues counts from
both matchings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

GROUP_SIZES = {"POS": 20, "TREEBANK": 57, "DEPENDENCY": 72, "NER": 26, "MISC": 21}
GROUP_ORDER = ("POS", "TREEBANK", "DEPENDENCY", "NER", "MISC")

OTHER_BUCKETS = {
    "POS": "OTHER_POS",
    "TREEBANK": "OTHER_TB",
    "DEPENDENCY": "OTHER_DEP",
    "NER": "OTHER_NER",
}


class RegistryError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureRegistry:
    version: str
    groups: dict[str, tuple[str, ...]]
    slot_names: tuple[str, ...]
    slot_index: dict[str, int]

    @property
    def total(self) -> int:
        return len(self.slot_names)

    def group_slots(self, group: str) -> list[int]:
        return [self.slot_index[name] for name in self.groups[group]]


def load_registry(manifest: dict | str) -> FeatureRegistry:
    """Build and validate a registry from a manifest dict or JSON text.

    Rejects wrong group sizes, duplicate names within a group, and missing
    groups; the error names the offending group and the expected/actual
    sizes.
    """
    if isinstance(manifest, str):
        try:
            manifest = json.loads(manifest)
        except json.JSONDecodeError as exc:
            raise RegistryError(f"manifest is not valid JSON: {exc}") from exc
    if not isinstance(manifest, dict) or "groups" not in manifest:
        raise RegistryError("manifest must be an object with a 'groups' key")

    raw_groups = manifest["groups"]
    version = str(manifest.get("version", "unversioned"))

    groups: dict[str, tuple[str, ...]] = {}
    for group in GROUP_ORDER:
        if group not in raw_groups:
            raise RegistryError(f"manifest missing group {group}")
        names = [str(n) for n in raw_groups[group]]
        expected = GROUP_SIZES[group]
        if len(names) != expected:
            raise RegistryError(f"{group} expected {expected} got {len(names)}")
        seen: set[str] = set()
        for name in names:
            if name in seen:
                raise RegistryError(f"duplicate name {name!r} in group {group}")
            seen.add(name)
        groups[group] = tuple(names)
    extra = set(raw_groups) - set(GROUP_ORDER)
    if extra:
        raise RegistryError(f"unknown groups in manifest: {sorted(extra)}")

    slot_names = tuple(dict.fromkeys(n for g in GROUP_ORDER for n in groups[g]))
    slot_index = {name: i for i, name in enumerate(slot_names)}
    return FeatureRegistry(version=version, groups=groups, slot_names=slot_names, slot_index=slot_index)


def default_registry() -> FeatureRegistry:
    raw = resources.files("newsgauge.data").joinpath("registry_default.json").read_text("utf-8")
    return load_registry(raw)


def load_registry_file(path) -> FeatureRegistry:
    with open(path, encoding="utf-8") as f:
        return load_registry(f.read())
