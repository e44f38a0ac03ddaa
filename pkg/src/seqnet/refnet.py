"""Hierarchical reference net: a multi-parent metric index.

Every stored object is a *reference* at its highest level ``k`` and, implicitly,
at every level below. ``lists[i]`` of a node holds the level-``i-1`` references
(objects whose highest level is exactly ``i-1``) within ``ε'·2^i`` of it, so a
node has one list per level at which it has children. Invariants:

* radius: every member ``z`` of a level-``i`` list satisfies ``d(owner, z) <= ε'·2^i``;
* inclusive: every object except the root sits in at least one list one level up;
* exclusive: two objects whose highest levels are ``a`` and ``b`` are more than
  ``ε'·2^min(a, b)`` apart;
* an object belongs to at most ``num_max`` lists.

Levels are unbounded integers (they go negative for objects closer than ``ε'``).
Objects at distance 0 from a stored object are kept as *twins* of it.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Mapping

from .errors import DuplicateIdError, IndexFormatError, MissingIdError, NotMetricError

FORMAT_VERSION = 1
_MAGIC = "seqnet-refnet"


@dataclass(frozen=True)
class NetConfig:
    """Base radius ``ε'`` and the cap on lists per object (``None`` = unlimited)."""

    base_radius: float = 1.0
    num_max: int | None = 5

    def __post_init__(self):
        if not self.base_radius > 0 or not math.isfinite(self.base_radius):
            raise ValueError("base_radius must be a positive finite number")
        if self.num_max is not None and self.num_max < 1:
            raise ValueError("num_max must be >= 1 or None")


class _Node:
    __slots__ = ("id", "level", "lists", "parents", "twins")

    def __init__(self, obj_id, level):
        self.id = obj_id
        self.level = level
        self.lists: dict[int, list] = {}
        self.parents: list = []
        self.twins: list = []

    def lowest_list(self) -> int | None:
        return min(self.lists) if self.lists else None


@dataclass(frozen=True)
class RangeResult:
    """Answer of a range query.

    ``distances`` holds every distance actually computed (object id -> value);
    ``pruned`` the ids excluded without computing their distance.
    """

    ids: list
    distances: dict
    computations: int
    pruned: frozenset = frozenset()


@dataclass(frozen=True)
class NetViolation:
    kind: str
    detail: str


@dataclass
class NetReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def count(self, kind: str) -> int:
        return sum(1 for v in self.violations if v.kind == kind)

    def __str__(self) -> str:
        if self.ok:
            return "reference net: clean"
        return "\n".join(f"{v.kind}: {v.detail}" for v in self.violations)


@dataclass(frozen=True)
class NetStats:
    levels: int
    top_level: int | None
    bottom_level: int | None
    nodes: int
    references: int
    lists: int
    entries: int
    avg_parents: float
    avg_list_size: float
    est_bytes: int


class ReferenceNet:
    """Reference net over objects compared with ``distance``.

    ``distance`` is called as ``distance(a, b)`` on payloads. If it has a
    ``declared_metric`` attribute it must be true; a ``raw`` method, when
    present, is used for the unchecked inner calls and ``check`` for a
    one-off domain check per insert or query.
    """

    def __init__(self, distance: Callable[[Any, Any], float], config: NetConfig | None = None):
        if not getattr(distance, "declared_metric", True):
            raise NotMetricError(
                f"{getattr(distance, 'kind', distance)!r} is not a metric; "
                "triangle-inequality pruning would be unsound")
        self.distance = distance
        self.config = config or NetConfig()
        self._raw = getattr(distance, "raw", distance)
        self._check = getattr(distance, "check", None)
        kind = getattr(distance, "kind", None)
        self._slack = 0.0 if kind in ("hamming", "levenshtein") else 1e-9
        self._nodes: dict[Hashable, _Node] = {}
        self._where: dict[Hashable, Hashable] = {}   # object id -> id of its node
        self._payload: dict[Hashable, Any] = {}
        self._root = None
        self.build_computations = 0

    # -- basic accessors ----------------------------------------------------

    def __len__(self) -> int:
        return len(self._payload)

    def __contains__(self, obj_id) -> bool:
        return obj_id in self._payload

    def ids(self) -> list:
        return list(self._payload)

    def payload(self, obj_id):
        return self._payload[obj_id]

    @property
    def root(self):
        return self._root

    def level_of(self, obj_id) -> int:
        return self._nodes[self._where[obj_id]].level

    def radius(self, level: int) -> float:
        return math.ldexp(self.config.base_radius, level)

    def _d(self, a, b) -> float:
        self.build_computations += 1
        return self._raw(a, b)

    def _dist_to(self, payload, cache: dict) -> Callable:
        def d(n):
            v = cache.get(n)
            if v is None:
                v = cache[n] = self._d(payload, self._payload[n])
            return v
        return d

    # -- insertion ------------------------------------------------------------

    def insert(self, obj_id, payload) -> None:
        """Insert ``payload`` under ``obj_id`` at the lowest level where it has a parent."""
        if obj_id in self._payload:
            raise DuplicateIdError(obj_id)
        if self._root is None:
            self._payload[obj_id] = payload
            self._where[obj_id] = obj_id
            self._nodes[obj_id] = _Node(obj_id, 0)
            self._root = obj_id
            return
        if self._check is not None:
            self._check(payload, self._payload[self._root])
        self._payload[obj_id] = payload
        d = self._dist_to(payload, {})
        root = self._nodes[self._root]
        dr = d(root.id)
        if dr == 0:
            self._add_twin(root.id, obj_id)
            return
        while dr > self.radius(root.level):
            root.level += 1

        level = root.level
        cover = {root.id: dr}
        stack = [(level, cover)]
        while True:
            # candidates at level-1: the cover itself plus its level lists
            cand = dict(cover)
            for q in cover:
                for c in self._nodes[q].lists.get(level, ()):
                    if c not in cand:
                        cand[c] = d(c)
            for c, v in cand.items():
                if v == 0:
                    self._add_twin(c, obj_id)
                    return
            r = self.radius(level)
            cover = {c: v for c, v in cand.items() if v <= r}
            if not cover:
                break
            level -= 1
            stack.append((level, cover))

        for lvl, cov in reversed(stack):
            r = self.radius(lvl)
            parents = sorted((v, c) for c, v in cov.items() if v <= r)
            if parents:
                self._attach(_Node(obj_id, lvl - 1), parents)
                self._where[obj_id] = obj_id
                return
        raise AssertionError("insertion found no parent")  # root always covers

    def _add_twin(self, primary, obj_id) -> None:
        self._nodes[primary].twins.append(obj_id)
        self._where[obj_id] = primary

    def _attach(self, node: _Node, parents: list) -> None:
        """Hang ``node`` under the closest ``num_max`` of ``parents`` ((distance, id) pairs)."""
        cap = self.config.num_max
        chosen = parents if cap is None else parents[:cap]
        self._nodes[node.id] = node
        for _, p in chosen:
            self._nodes[p].lists.setdefault(node.level + 1, []).append(node.id)
            node.parents.append(p)

    # -- deletion -------------------------------------------------------------

    def delete(self, obj_id) -> None:
        """Remove ``obj_id``; children left without a parent are re-attached."""
        if obj_id not in self._payload:
            raise MissingIdError(obj_id)
        primary = self._where.pop(obj_id)
        del self._payload[obj_id]
        if primary != obj_id:
            self._nodes[primary].twins.remove(obj_id)
            return
        node = self._nodes.pop(obj_id)
        if node.twins:
            self._transplant(node, node.twins[0])
            return
        if obj_id == self._root:
            self._delete_root(node)
            return
        for p in node.parents:
            self._unlist(p, node.level + 1, obj_id)
        orphans = []
        for members in node.lists.values():
            for c in members:
                child = self._nodes[c]
                child.parents.remove(obj_id)
                if not child.parents:
                    orphans.append(c)
        self._reattach_all(orphans)

    def _unlist(self, owner, level, obj_id) -> None:
        lst = self._nodes[owner].lists[level]
        lst.remove(obj_id)
        if not lst:
            del self._nodes[owner].lists[level]

    def _transplant(self, node: _Node, heir) -> None:
        # a twin is at distance 0, so it satisfies every constraint of the node
        new = _Node(heir, node.level)
        new.lists = node.lists
        new.parents = node.parents
        new.twins = [t for t in node.twins if t != heir]
        self._nodes[heir] = new
        for t in new.twins:
            self._where[t] = heir
        self._where[heir] = heir
        for p in new.parents:
            lst = self._nodes[p].lists[new.level + 1]
            lst[lst.index(node.id)] = heir
        for members in new.lists.values():
            for c in members:
                ps = self._nodes[c].parents
                ps[ps.index(node.id)] = heir
        if self._root == node.id:
            self._root = heir

    def _delete_root(self, node: _Node) -> None:
        if not node.lists:
            self._root = None
            return
        top_list = node.lists[max(node.lists)]
        heir = self._pick_new_root(top_list)
        orphans = []
        for members in node.lists.values():
            for c in members:
                child = self._nodes[c]
                child.parents.remove(node.id)
                if c != heir and not child.parents:
                    orphans.append(c)
        # only the old root lived above the heir's level, so promotion is safe
        new_root = self._nodes[heir]
        new_root.level = node.level
        self._root = heir
        self._reattach_all(orphans)

    def _pick_new_root(self, siblings: list):
        if len(siblings) == 1:
            return siblings[0]
        best, best_key = None, None
        for s in siblings:
            ps = self._payload[s]
            med = statistics.median(self._d(ps, self._payload[t]) for t in siblings if t != s)
            key = (-med, s)
            if best_key is None or key < best_key:
                best, best_key = s, key
        return best

    def _reattach_all(self, orphans: Iterable) -> None:
        # higher levels first so they are reachable when lower orphans search
        for c in sorted(orphans, key=lambda c: (-self._nodes[c].level, c)):
            self._reattach(c)

    def _reattach(self, obj_id) -> None:
        node = self._nodes[obj_id]
        payload = self._payload[obj_id]
        while True:
            k = node.level
            root = self._nodes[self._root]
            if k + 1 > root.level:
                root.level = k + 1
            found = self._search(payload, k + 1, self.radius(k + 1))
            if found:
                cap = self.config.num_max
                for _, p in (found if cap is None else found[:cap]):
                    self._nodes[p].lists.setdefault(k + 1, []).append(obj_id)
                    node.parents.append(p)
                return
            # nothing within reach one level up: the node is separated there too
            node.level = k + 1

    def _search(self, payload, level: int, radius: float) -> list:
        """Sorted ``(distance, id)`` of level-``level`` references within ``radius``."""
        d = self._dist_to(payload, {})
        root = self._nodes[self._root]
        base = self.config.base_radius

        def bound(j):
            return radius + base * (math.ldexp(1.0, j + 1) - math.ldexp(1.0, level + 1))

        front = {root.id: d(root.id)}
        if front[root.id] > bound(root.level):
            return []
        for j in range(root.level, level, -1):
            cand = dict(front)
            for f in front:
                for c in self._nodes[f].lists.get(j, ()):
                    if c not in cand:
                        cand[c] = d(c)
            b = bound(j - 1)
            front = {c: v for c, v in cand.items() if v <= b}
            if not front:
                return []
        return sorted((v, c) for c, v in front.items() if v <= radius)

    # -- range query ----------------------------------------------------------

    def range_query(self, q, eps: float) -> RangeResult:
        """All object ids within ``eps`` of ``q``, pruning with the level radii.

        At a reference ``R`` on level ``i`` with ``d = d(q, R)``: everything
        derived from ``R`` is accepted when ``d + ε'·2^(i+1) <= eps`` and
        rejected when ``d - ε'·2^(i+1) > eps``. Otherwise the members of
        ``R``'s level-``i`` list are accepted or rejected individually with
        radius ``ε'·2^i``; their own subtrees stay open.
        """
        if eps < 0:
            raise ValueError("eps must be non-negative")
        if self._root is None:
            return RangeResult([], {}, 0, frozenset())
        if self._check is not None:
            self._check(q, self._payload[self._root])
        raw, payload, nodes = self._raw, self._payload, self._nodes
        slack = self._slack
        dcache: dict = {}
        inside: set = set()
        outside: set = set()
        closed: set = set()
        level = nodes[self._root].level
        frontier = [self._root]
        while frontier:
            r1 = self.radius(level)
            r2 = 2.0 * r1
            nxt: list = []
            seen: set = set()
            for n in frontier:
                if n in closed:
                    continue
                node = nodes[n]
                low = node.lowest_list()
                below = low is not None and low <= level
                d = dcache.get(n)
                if d is None:
                    if not below and (n in inside or n in outside):
                        continue
                    d = dcache[n] = raw(q, payload[n])
                if d <= eps:
                    inside.add(n)
                else:
                    outside.add(n)
                if not below:
                    continue
                if d + r2 <= eps - slack:
                    self._close(n, level, inside, closed)
                    continue
                if d - r2 > eps + slack:
                    self._close(n, level, outside, closed)
                    continue
                members = node.lists.get(level)
                if members:
                    if d + r1 <= eps - slack:
                        inside.update(members)
                    elif d - r1 > eps + slack:
                        outside.update(members)
                    for c in members:
                        if c not in seen:
                            seen.add(c)
                            nxt.append(c)
                if low < level and n not in seen:
                    seen.add(n)
                    nxt.append(n)
            frontier = nxt
            level -= 1

        # a computed distance always wins over a bound-based decision
        result = {n for n in inside if dcache.get(n, 0.0) <= eps}
        ids = []
        for n in result:
            ids.append(n)
            ids.extend(nodes[n].twins)
        pruned = set()
        for n in outside:
            if n not in dcache:
                pruned.add(n)
                pruned.update(nodes[n].twins)
        distances = dict(dcache)
        for n in dcache:
            for t in nodes[n].twins:
                distances[t] = dcache[n]
        return RangeResult(sorted(ids, key=_sort_key), distances, len(dcache), frozenset(pruned))

    def _close(self, start, level, target: set, closed: set) -> None:
        """Decide everything derived from ``start`` at ``level`` at once."""
        nodes = self._nodes
        target.add(start)
        closed.add(start)
        stack = [(start, level)]
        while stack:
            n, lvl = stack.pop()
            for i, members in nodes[n].lists.items():
                if i > lvl:
                    continue
                for c in members:
                    if c not in closed:
                        closed.add(c)
                        target.add(c)
                        stack.append((c, nodes[c].level))

    # -- validation and statistics -------------------------------------------

    def validate(self) -> NetReport:
        """Check every structural invariant; returns all violations found."""
        rep = NetReport()
        bad = rep.violations.append
        nodes = self._nodes
        if self._root is None:
            if nodes or self._payload:
                bad(NetViolation("storage", "objects present but no root"))
            return rep
        if self._root not in nodes:
            bad(NetViolation("storage", f"root {self._root!r} has no node"))
            return rep
        stored = set()
        for nid, node in nodes.items():
            for t in [nid] + node.twins:
                if t in stored:
                    bad(NetViolation("storage", f"object {t!r} stored twice"))
                stored.add(t)
                if self._where.get(t) != nid:
                    bad(NetViolation("storage", f"object {t!r} not mapped to node {nid!r}"))
        if stored != set(self._payload):
            bad(NetViolation("storage", "stored objects differ from payload table"))

        root_level = nodes[self._root].level
        cap = self.config.num_max
        for nid, node in nodes.items():
            if nid != self._root and node.level >= root_level:
                bad(NetViolation("storage", f"{nid!r} at level {node.level} not below the root"))
            for t in node.twins:
                if self._raw(self._payload[nid], self._payload[t]) != 0:
                    bad(NetViolation("storage", f"twin {t!r} of {nid!r} at nonzero distance"))
            for lvl, members in node.lists.items():
                if lvl > node.level:
                    bad(NetViolation("storage", f"{nid!r} has a list above its level"))
                if not members:
                    bad(NetViolation("storage", f"{nid!r} keeps an empty list"))
                if len(set(members)) != len(members):
                    bad(NetViolation("storage", f"duplicate entries in list ({nid!r}, {lvl})"))
                r = self.radius(lvl)
                for c in members:
                    child = nodes.get(c)
                    if child is None:
                        bad(NetViolation("storage", f"list ({nid!r}, {lvl}) names unknown {c!r}"))
                        continue
                    if child.level != lvl - 1:
                        bad(NetViolation("storage",
                                         f"{c!r} (level {child.level}) listed at level {lvl}"))
                    if nid not in child.parents:
                        bad(NetViolation("links", f"{c!r} in list of {nid!r} but not linked back"))
                    dist = self._raw(self._payload[nid], self._payload[c])
                    if dist > r:
                        bad(NetViolation("radius",
                                         f"{c!r} at {dist:g} from {nid!r} exceeds radius {r:g}"))
            if nid != self._root and not node.parents:
                bad(NetViolation("inclusive", f"{nid!r} (level {node.level}) has no parent"))
            if cap is not None and len(node.parents) > cap:
                bad(NetViolation("parent_cap", f"{nid!r} has {len(node.parents)} parents"))
            for p in node.parents:
                owner = nodes.get(p)
                if owner is None or nid not in owner.lists.get(node.level + 1, ()):
                    bad(NetViolation("links", f"{nid!r} names parent {p!r} which does not list it"))

        ids = list(nodes)
        for a_i, a in enumerate(ids):
            pa, la = self._payload[a], nodes[a].level
            for b in ids[a_i + 1:]:
                lvl = min(la, nodes[b].level)
                dist = self._raw(pa, self._payload[b])
                if not dist > self.radius(lvl):
                    bad(NetViolation("exclusive",
                                     f"{a!r} and {b!r} at {dist:g} share level {lvl}"))

        seen = {self._root}
        stack = [self._root]
        while stack:
            n = stack.pop()
            for members in nodes[n].lists.values():
                for c in members:
                    if c not in seen and c in nodes:
                        seen.add(c)
                        stack.append(c)
        for nid in nodes:
            if nid not in seen:
                bad(NetViolation("reachability", f"{nid!r} is not reachable from the root"))
        return rep

    def stats(self) -> NetStats:
        nodes = self._nodes
        if not nodes:
            return NetStats(0, None, None, 0, 0, 0, 0, 0.0, 0.0, 0)
        levels = [n.level for n in nodes.values()]
        top, bottom = max(levels), min(levels)
        n_lists = sum(len(n.lists) for n in nodes.values())
        entries = sum(len(m) for n in nodes.values() for m in n.lists.values())
        refs = len(nodes)
        # 4-byte ids and levels: one id per entry, id+level+count per node
        est = 4 * entries + 12 * refs + 8 * n_lists + 4 * (len(self._payload) - refs)
        return NetStats(
            levels=top - bottom + 1,
            top_level=top,
            bottom_level=bottom,
            nodes=len(self._payload),
            references=refs,
            lists=n_lists,
            entries=entries,
            avg_parents=entries / (refs - 1) if refs > 1 else 0.0,
            avg_list_size=entries / n_lists if n_lists else 0.0,
            est_bytes=est,
        )

    # -- serialization --------------------------------------------------------

    def to_text(self, payload_ref: str = "") -> str:
        """Versioned line format; object ids must be integers."""
        st = self.stats()
        gap = getattr(self.distance, "gap", None)
        lines = [
            f"{_MAGIC} {FORMAT_VERSION}",
            f"base_radius {self.config.base_radius!r}",
            f"num_max {self.config.num_max if self.config.num_max is not None else 'none'}",
            f"levels {st.levels}",
            f"distance {getattr(self.distance, 'kind', 'custom')}",
            f"symbolic {int(bool(getattr(self.distance, 'symbolic', False)))}",
            "gap " + (",".join(repr(v) for v in gap) if gap is not None else "none"),
            f"root {self._root if self._root is not None else 'none'}",
            f"nodes {len(self._nodes)}",
        ]
        for nid in sorted(self._nodes):
            node = self._nodes[nid]
            if not isinstance(nid, int):
                raise TypeError("only integer object ids can be serialized")
            lists = ";".join(f"{lvl}:" + ",".join(map(str, node.lists[lvl]))
                             for lvl in sorted(node.lists, reverse=True)) or "-"
            lines.append(" ".join([
                str(nid), str(node.level),
                ",".join(map(str, node.parents)) or "-",
                lists,
                ",".join(map(str, node.twins)) or "-",
            ]))
        lines.append(f"payload {payload_ref}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, distance, payloads: Mapping) -> tuple["ReferenceNet", str]:
        """Rebuild a net from :meth:`to_text` output and validate it.

        Returns the net and the payload reference string. Raises
        :class:`IndexFormatError` on malformed input or any invariant violation.
        """
        lines = text.splitlines()
        try:
            magic, version = lines[0].split()
            if magic != _MAGIC:
                raise ValueError("not a reference-net file")
            if int(version) != FORMAT_VERSION:
                raise ValueError(f"unsupported format version {version}")
            header = {}
            pos = 1
            while not lines[pos].split(" ", 1)[0].lstrip("-").isdigit():
                key, _, value = lines[pos].partition(" ")
                header[key] = value
                pos += 1
                if key == "nodes":
                    break
            count = int(header["nodes"])
            num_max = None if header["num_max"] == "none" else int(header["num_max"])
            config = NetConfig(float(header["base_radius"]), num_max)
            kind = getattr(distance, "kind", "custom")
            if header["distance"] != kind:
                raise ValueError(f"index built with {header['distance']}, not {kind}")
            net = cls(distance, config)
            for line in lines[pos:pos + count]:
                nid_s, level_s, parents_s, lists_s, twins_s = line.split(" ")
                nid = int(nid_s)
                node = _Node(nid, int(level_s))
                if parents_s != "-":
                    node.parents = [int(v) for v in parents_s.split(",")]
                if lists_s != "-":
                    for chunk in lists_s.split(";"):
                        lvl, _, members = chunk.partition(":")
                        node.lists[int(lvl)] = [int(v) for v in members.split(",")]
                if twins_s != "-":
                    node.twins = [int(v) for v in twins_s.split(",")]
                net._nodes[nid] = node
                for t in [nid] + node.twins:
                    if t in net._where:
                        raise ValueError(f"object {t} stored twice")
                    net._where[t] = nid
                    net._payload[t] = payloads[t]
            tail = lines[pos + count]
            if not tail.startswith("payload"):
                raise ValueError("missing payload line")
            ref = tail[len("payload"):].strip()
            root = header["root"]
            net._root = None if root == "none" else int(root)
        except (ValueError, KeyError, IndexError) as exc:
            raise IndexFormatError(f"malformed index: {exc}") from exc
        report = net.validate()
        if not report.ok:
            raise IndexFormatError(f"index fails validation:\n{report}")
        return net, ref


def _sort_key(v):
    return (type(v).__name__, v)
