"""Perceptual image hashing and near-duplicate clustering.

64-bit DCT hashes, density clustering over the Hamming metric with a
BK-tree for neighbor lookups, reference-set annotation, and per-cluster
daily post series.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy.fft import dct

from .corpus import CorpusHandle
from .errors import ClusteringError, HashingError
from .trends import TermSeries, day_axis, fractions_for


@dataclass(frozen=True)
class ImageHash:
    image_ref: str
    bits: int  # 64-bit perceptual hash
    community: str
    timestamp: int

    def __post_init__(self):
        if not 0 <= self.bits < (1 << 64):
            raise HashingError(f"hash out of 64-bit range: {self.bits}")


@dataclass(frozen=True)
class MemeCluster:
    """Near-duplicate image group; id -1 is the noise bucket."""

    cluster_id: int
    members: tuple[ImageHash, ...]
    medoid: ImageHash
    label: str | None = None
    match_distance: int | None = None


@dataclass(frozen=True)
class ReferenceSet:
    entries: tuple[tuple[str, int], ...]
    source: str


def hash_to_hex(bits: int) -> str:
    return f"{bits:016x}"


def hex_to_hash(text: str) -> int:
    text = text.strip()
    if len(text) != 16:
        raise HashingError(f"expected 16 hex chars, got {text!r}")
    return int(text, 16)


def hamming(h1: int, h2: int) -> int:
    """Popcount of the XOR; 0..64."""
    return (h1 ^ h2).bit_count()


def phash(image) -> int:
    """64-bit perceptual hash of an image.

    Resize to 32x32 grayscale, 2-D DCT, keep the 8x8 low-frequency block
    at offset (1,1) so the DC term is excluded, and set each bit by
    comparing its coefficient against the block median.
    """
    gray = _to_gray32(image)
    freq = dct(dct(gray, axis=0, norm="ortho"), axis=1, norm="ortho")
    block = freq[1:9, 1:9]
    med = np.median(block)
    bits = 0
    flat = block.ravel()
    for i in range(64):
        if flat[i] > med:
            bits |= 1 << i
    return bits


def _to_gray32(image) -> np.ndarray:
    if isinstance(image, np.ndarray):
        if image.ndim != 2:
            raise HashingError("array input must be a 2-D grayscale raster")
        arr = np.clip(image, 0, 255).astype(np.uint8)
        pil = Image.fromarray(arr, mode="L")
    elif isinstance(image, Image.Image):
        pil = image
        if getattr(pil, "n_frames", 1) > 1:
            pil.seek(0)  # animated images hash their first frame
        pil = pil.convert("L")
    else:
        raise HashingError(f"unsupported image input: {type(image).__name__}")
    pil = pil.resize((32, 32), Image.Resampling.LANCZOS)
    return np.asarray(pil, dtype=np.float64)


def hash_image_file(path) -> int:
    try:
        with Image.open(path) as img:
            return phash(img)
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise HashingError(f"cannot decode image {path}: {exc}") from exc


class BKTree:
    """Metric tree over 64-bit values under Hamming distance."""

    __slots__ = ("_root",)

    def __init__(self, values=()):
        self._root = None
        for v in values:
            self.add(v)

    def add(self, value: int) -> None:
        if self._root is None:
            self._root = [value, {}]
            return
        node = self._root
        while True:
            d = hamming(value, node[0])
            if d == 0:
                return  # tree stores unique values
            child = node[1].get(d)
            if child is None:
                node[1][d] = [value, {}]
                return
            node = child

    def query(self, value: int, radius: int) -> list[int]:
        """All stored values within ``radius`` of ``value``."""
        if self._root is None:
            return []
        out = []
        stack = [self._root]
        while stack:
            node = stack.pop()
            d = hamming(value, node[0])
            if d <= radius:
                out.append(node[0])
            lo, hi = d - radius, d + radius
            for dist, child in node[1].items():
                if lo <= dist <= hi:
                    stack.append(child)
        return out


def _canonical_sorted(hashes):
    return sorted(
        hashes, key=lambda h: (h.bits, h.image_ref, h.community, h.timestamp)
    )


def cluster_hashes(
    hashes: list[ImageHash], eps: int = 8, min_pts: int = 5
) -> list[MemeCluster]:
    """Density clustering (DBSCAN semantics) over the Hamming metric.

    A point is core when its eps-neighborhood (itself included) holds at
    least ``min_pts`` points; clusters are the connected components of
    core points under eps-adjacency, and every non-core point joins its
    nearest core's component (ties: smallest hash value) or the noise
    bucket (-1).  The partition is a pure function of the multiset of
    points, so input order never matters.
    """
    if not 1 <= eps <= 32:
        raise ClusteringError(f"eps must be in [1, 32], got {eps}")
    if min_pts < 2:
        raise ClusteringError(f"min_pts must be >= 2, got {min_pts}")
    if not hashes:
        return []

    points = _canonical_sorted(hashes)
    groups: dict[int, list[ImageHash]] = {}
    for h in points:
        groups.setdefault(h.bits, []).append(h)
    values = sorted(groups)
    tree = BKTree(values)

    neighbor_values = {v: sorted(tree.query(v, eps)) for v in values}
    weight = {v: len(groups[v]) for v in values}
    core = {
        v: sum(weight[u] for u in neighbor_values[v]) >= min_pts for v in values
    }

    parent = {v: v for v in values if core[v]}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for v in values:
        if not core[v]:
            continue
        for u in neighbor_values[v]:
            if core[u]:
                ru, rv = find(u), find(v)
                if ru != rv:
                    parent[max(ru, rv)] = min(ru, rv)

    component: dict[int, list[int]] = {}
    for v in values:
        if core[v]:
            component.setdefault(find(v), []).append(v)

    member_values: dict[int, list[int]] = {root: list(vs) for root, vs in component.items()}
    for v in values:
        if core[v]:
            continue
        cands = [
            (hamming(v, u), u) for u in neighbor_values[v] if core[u]
        ]
        if cands:
            _, nearest = min(cands)
            member_values[find(nearest)].append(v)

    clusters = []
    noise_members: list[ImageHash] = []
    assigned = set()
    for root in sorted(member_values, key=lambda r: min(member_values[r])):
        vals = sorted(set(member_values[root]))
        assigned.update(vals)
        members = [h for v in vals for h in groups[v]]
        clusters.append(_finish_cluster(len(clusters), members, vals, groups))
    for v in values:
        if v not in assigned:
            noise_members.extend(groups[v])
    if noise_members:
        vals = sorted({h.bits for h in noise_members})
        clusters.append(
            _finish_cluster(-1, noise_members, vals, groups)
        )
    return clusters


def _finish_cluster(cluster_id, members, vals, groups) -> MemeCluster:
    members = tuple(_canonical_sorted(members))
    # medoid over unique values, weighted by multiplicity
    arr = np.asarray(vals, dtype=np.uint64)
    mults = np.asarray([len(groups[v]) for v in vals], dtype=np.int64)
    dmat = np.bitwise_count(arr[:, None] ^ arr[None, :]).astype(np.int64)
    totals = (dmat * mults[None, :]).sum(axis=1)
    best_value = int(arr[int(np.argmin(totals))])  # argmin ties: smallest value (sorted)
    medoid = next(h for h in members if h.bits == best_value)
    return MemeCluster(cluster_id=cluster_id, members=members, medoid=medoid)


def labels_for(hashes: list[ImageHash], clusters: list[MemeCluster]) -> list[int]:
    """Cluster id per input hash, aligned with ``hashes`` order."""
    by_key = {}
    for c in clusters:
        for h in c.members:
            by_key[(h.bits, h.image_ref, h.community, h.timestamp)] = c.cluster_id
    return [
        by_key[(h.bits, h.image_ref, h.community, h.timestamp)] for h in hashes
    ]


def load_reference_csv(path) -> ReferenceSet:
    """Reference meme file: CSV rows of ``label,hash_hex``."""
    entries = []
    with open(path, encoding="utf-8", newline="") as f:
        for row in csv.reader(f):
            if not row or row[0].startswith("#"):
                continue
            if len(row) != 2 or not row[0].strip():
                raise HashingError(f"bad reference row: {row!r}")
            entries.append((row[0].strip(), hex_to_hash(row[1])))
    if not entries:
        raise HashingError(f"reference set is empty: {path}")
    return ReferenceSet(entries=tuple(entries), source=str(path))


def annotate_clusters(
    clusters: list[MemeCluster], reference: ReferenceSet, max_distance: int = 8
) -> list[MemeCluster]:
    """Label each cluster with the reference entry nearest its medoid,
    if within ``max_distance``; deliberately conservative, distant
    clusters stay unlabeled.  Noise (-1) is never labeled."""
    if not reference.entries:
        raise HashingError("reference set is empty")
    out = []
    for c in clusters:
        if c.cluster_id == -1:
            out.append(c)
            continue
        dist, label = min(
            (hamming(c.medoid.bits, bits), lab) for lab, bits in reference.entries
        )
        if dist <= max_distance:
            out.append(replace(c, label=label, match_distance=dist))
        else:
            out.append(c)
    return out


def cluster_series(
    corpus: CorpusHandle, cluster: MemeCluster
) -> dict[str, TermSeries]:
    """Daily counts of posts containing any member image, per community."""
    refs = {h.image_ref for h in cluster.members}
    post_keys = set()
    for ref in refs:
        post_keys.update(corpus.image_index.get(ref, ()))

    label = f"cluster:{cluster.cluster_id}"
    out: dict[str, TermSeries] = {}
    for community in corpus.communities:
        days, totals = day_axis(corpus, community)
        counts = np.zeros(len(days), dtype=np.int64)
        first = days[0]
        for key in post_keys:
            post = corpus.post(key)
            if post.community == community:
                counts[(post.day - first).days] += 1
        out[community] = TermSeries(
            label, community, days, counts, totals, fractions_for(counts, totals)
        )
    return out


def hash_corpus_images(
    corpus: CorpusHandle, image_dir, cache_path=None
) -> tuple[list[ImageHash], int]:
    """Hash every distinct image ref in the corpus.

    Returns the hashes (one per ref, carrying the earliest referencing
    post's community/timestamp) and the count of undecodable images.
    Uses/updates the ref -> hash cache at ``cache_path`` when given.
    """
    image_dir = Path(image_dir)
    cache = read_hash_cache(cache_path) if cache_path else {}

    first_post: dict[str, tuple] = {}
    for ref in sorted(corpus.image_index):
        keys = corpus.image_index[ref]
        posts = sorted(
            (corpus.post(k) for k in keys), key=lambda p: (p.timestamp, p.key)
        )
        first_post[ref] = (posts[0].community, posts[0].timestamp)

    hashes = []
    skipped = 0
    for ref in sorted(first_post):
        if ref in cache:
            bits = cache[ref]
        else:
            path = image_dir / ref
            if not path.is_file():
                skipped += 1
                continue
            try:
                bits = hash_image_file(path)
            except HashingError:
                skipped += 1
                continue
            cache[ref] = bits
        comm, ts = first_post[ref]
        hashes.append(ImageHash(ref, bits, comm, ts))

    if cache_path:
        write_hash_cache(cache_path, cache)
    return hashes, skipped


def read_hash_cache(path) -> dict[str, int]:
    path = Path(path)
    if not path.is_file():
        return {}
    out = {}
    with open(path, encoding="utf-8", newline="") as f:
        for row in csv.reader(f):
            if len(row) == 2:
                out[row[0]] = hex_to_hash(row[1])
    return out


def write_hash_cache(path, cache: dict[str, int]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        for ref in sorted(cache):
            w.writerow([ref, hash_to_hex(cache[ref])])


def clusters_to_json(clusters: list[MemeCluster], corpus: CorpusHandle, path) -> None:
    """Cluster summary export: one object per cluster with the medoid
    hash, optional label, and per-community post counts."""
    rows = []
    for c in clusters:
        refs = {h.image_ref for h in c.members}
        per_comm: dict[str, int] = {}
        seen = set()
        for ref in refs:
            for key in corpus.image_index.get(ref, ()):
                if key not in seen:
                    seen.add(key)
                    per_comm[key[0]] = per_comm.get(key[0], 0) + 1
        row = {
            "cluster_id": c.cluster_id,
            "size": len(c.members),
            "medoid_hash_hex": hash_to_hex(c.medoid.bits),
            "per_community_counts": dict(sorted(per_comm.items())),
        }
        if c.label is not None:
            row["label"] = c.label
            row["match_distance"] = c.match_distance
        rows.append(row)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(rows, f, indent=2)
        f.write("\n")
