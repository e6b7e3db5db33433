"""Deterministic synthetic corpus generator.

Produces a multi-community JSONL corpus with planted structure in every
dimension the toolkit measures: a term whose daily rate shifts on a
known date, topic-specific vocabulary blocks, near-duplicate image
groups that spread across communities with short lags, and a reference
file labeling some of those groups.  Everything is a pure function of
the seed, so two generations are byte-identical.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np
from PIL import Image

DAY = 86400
T0 = 1467331200  # 2016-07-01 UTC

COMMUNITIES = ("alpha", "beta", "gamma")

GLUE = "the and to of in a is for on with that this it as are was".split()

COMMON = (
    "news report video stream thread post week year people country city "
    "game music film story photo question answer friend group life work "
    "home school money market price war peace law court vote press"
).split()

TOPIC_A = (
    "border wall election senate policy congress campaign ballot "
    "governor mayor debate poll district petition lobby treaty"
).split()

TOPIC_B = (
    "server code model data branch commit kernel packet cache "
    "compiler socket thread0 daemon buffer router protocol"
).split()

TREND_TERM = "signal"
SHIFT_DAY = 60  # the planted changepoint

N_MEME_BASES = 8
LABELED_BASES = (0, 2, 5)


def _post_text(rng, community, day, days):
    words = []
    n = int(rng.integers(6, 19))
    topic = TOPIC_A if community == "alpha" else TOPIC_B if community == "beta" else None
    for _ in range(n):
        r = rng.random()
        if r < 0.35:
            words.append(GLUE[int(rng.integers(0, len(GLUE)))])
        elif r < 0.75 or topic is None:
            words.append(COMMON[int(rng.integers(0, len(COMMON)))])
        else:
            words.append(topic[int(rng.integers(0, len(topic)))])
    # planted trend: rate of the tracked term shifts upward mid-corpus
    base = 0.02 if day < SHIFT_DAY else 0.08
    if community != "alpha":
        base *= 0.5
    if rng.random() < base:
        words.append(TREND_TERM if rng.random() < 0.8 else f"((({TREND_TERM})))")
    return " ".join(words)


def _base_image(rng, size=96):
    coarse = rng.uniform(25, 225, size=(8, 8))
    img = Image.fromarray(coarse.astype(np.uint8), mode="L")
    return img.resize((size, size), Image.Resampling.BICUBIC)


def _variant(rng, base):
    arr = np.asarray(base, dtype=np.float64)
    arr = arr * rng.uniform(0.95, 1.05) + rng.normal(0, 2.0, arr.shape)
    return Image.fromarray(np.clip(arr, 0, 255).astype(np.uint8), mode="L")


def _meme_events(rng, n_days):
    """Per-meme posting times: a seed community cascade with lagged
    cross-community copies, in (day_float, community) pairs."""
    events = []
    origin = COMMUNITIES[int(rng.integers(0, len(COMMUNITIES)))]
    n_roots = int(rng.integers(15, 40))
    roots = np.sort(rng.uniform(1, n_days - 3, size=n_roots))
    for t in roots:
        events.append((float(t), origin))
        for other in COMMUNITIES:
            if other == origin:
                continue
            for _ in range(rng.poisson(0.6)):
                events.append((float(t + rng.exponential(0.8)), other))
    return [(t, c) for t, c in events if t < n_days]


def generate(
    out_dir,
    posts: int = 10_000,
    days: int = 120,
    seed: int = 7,
    with_images: bool = True,
) -> dict:
    """Write corpus.jsonl (plus images/ and reference.csv) under
    ``out_dir``; returns a small description of what was planted."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    # daily volume ramps up over time, split unevenly across communities
    weights = np.linspace(1.0, 2.2, days)
    weights /= weights.sum()
    per_day = rng.multinomial(posts, weights)
    comm_share = {"alpha": 0.5, "beta": 0.3, "gamma": 0.2}

    records = []
    pid = 0
    for day in range(days):
        for _ in range(int(per_day[day])):
            u = rng.random()
            community = (
                "alpha" if u < comm_share["alpha"]
                else "beta" if u < comm_share["alpha"] + comm_share["beta"]
                else "gamma"
            )
            ts = T0 + day * DAY + int(rng.integers(0, DAY))
            records.append({
                "id": f"p{pid:06d}",
                "community": community,
                "ts": ts,
                "text": _post_text(rng, community, day, days),
                "images": [],
            })
            pid += 1

    image_meta = {}
    if with_images:
        img_dir = out / "images"
        img_dir.mkdir(exist_ok=True)
        ref_rows = []
        by_comm_day: dict[tuple[str, int], list[int]] = {}
        for i, rec in enumerate(records):
            d = (rec["ts"] - T0) // DAY
            by_comm_day.setdefault((rec["community"], d), []).append(i)

        variant_counter = 0
        for b in range(N_MEME_BASES):
            base = _base_image(rng)
            base_name = f"meme{b:02d}_base.png"
            base.save(img_dir / base_name)
            if b in LABELED_BASES:
                from .memes import hash_image_file, hash_to_hex
                ref_rows.append(
                    (f"planted_meme_{b:02d}", hash_to_hex(hash_image_file(img_dir / base_name)))
                )
            for t, community in _meme_events(rng, days):
                day = int(t)
                bucket = by_comm_day.get((community, day))
                if not bucket:
                    continue
                rec = records[bucket[int(rng.integers(0, len(bucket)))]]
                if len(rec["images"]) >= 2:
                    continue
                if rng.random() < 0.35:
                    name = base_name
                else:
                    name = f"meme{b:02d}_v{variant_counter:04d}.png"
                    _variant(rng, base).save(img_dir / name)
                    variant_counter += 1
                rec["images"].append(name)

        with open(out / "reference.csv", "w", encoding="utf-8") as f:
            for label, hex_hash in ref_rows:
                f.write(f"{label},{hex_hash}\n")
        image_meta = {
            "image_dir": str(img_dir),
            "reference": str(out / "reference.csv"),
            "meme_bases": N_MEME_BASES,
            "labeled_bases": list(LABELED_BASES),
        }

    corpus_path = out / "corpus.jsonl"
    with open(corpus_path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec) + "\n")

    return {
        "corpus": str(corpus_path),
        "posts": len(records),
        "days": days,
        "seed": seed,
        "communities": list(COMMUNITIES),
        "trend_term": TREND_TERM,
        "shift_day": SHIFT_DAY,
        **image_meta,
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Generate the bundled synthetic corpus."
    )
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--posts", type=int, default=10_000)
    parser.add_argument("--days", type=int, default=120)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--no-images", action="store_true")
    args = parser.parse_args(argv)
    info = generate(
        args.out, posts=args.posts, days=args.days, seed=args.seed,
        with_images=not args.no_images,
    )
    print(json.dumps(info, indent=2))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
