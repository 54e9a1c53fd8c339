"""Regenerate the bundled toy fixture under src/s3e/data/toy/.

Six planted topics of ten words each plus twenty function words, d=16.
Counts are hand-picked: function words are frequent, topic words rare.
Gold scores for the 20 pairs were assigned by hand.
"""
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "s3e" / "data" / "toy"
DIM = 16

TOPICS = {
    "animals": "dog cat horse bird fish lion tiger rabbit mouse cow",
    "food": "bread cheese apple soup rice pizza cake salad coffee tea",
    "weather": "rain snow wind storm sun cloud fog thunder cold hot",
    "sports": "football tennis soccer goal team match player coach ball race",
    "music": "guitar piano song band concert drum singer violin melody jazz",
    "vehicles": "car bus train truck bike plane boat road driver engine",
}
FUNCTION = "the a an and of to in on is was with for at by it from he she they his".split()
FUNCTION_COUNTS = [60000, 30000, 6000, 28000, 32000, 26000, 20000, 9000, 12000, 8000,
                   7000, 8500, 5000, 4000, 9000, 4500, 5500, 4200, 4800, 3900]

PAIRS = [
    (4.8, "The dog chased the cat.", "A cat was chased by the dog."),
    (2.4, "The dog chased the cat.", "The horse and the cow."),
    (3.8, "She drank coffee with cake.", "He had tea and cake."),
    (0.4, "She drank coffee with cake.", "The band played jazz."),
    (3.6, "Rain and wind in the storm.", "A cold storm with snow and thunder."),
    (3.4, "The team won the match.", "The player scored a goal in the match."),
    (0.2, "The team won the match.", "The car is on the road."),
    (3.5, "The singer and the band at the concert.", "A concert with guitar and drum."),
    (3.0, "The train and the bus.", "A truck and a car on the road."),
    (2.0, "The lion and the tiger.", "The tiger was hot in the sun."),
    (2.2, "Rice and soup for the driver.", "The driver of the truck."),
    (3.9, "Bread with cheese and salad.", "Pizza with cheese."),
    (4.3, "The coach of the football team.", "The football player and the coach."),
    (3.1, "The piano melody.", "A song on the violin."),
    (2.1, "The boat in the fog.", "A plane in the cloud."),
    (2.8, "The bird in the rain.", "The fish in the rain."),
    (2.9, "The mouse ate the cheese.", "The rabbit ate the salad."),
    (4.5, "He rode his bike in the snow.", "She rode a bike in the cold snow."),
    (0.3, "The tennis ball.", "The guitar song."),
    (3.2, "The engine of the plane.", "The zeppelin engine."),
]


def main():
    rng = np.random.default_rng(20240607)
    OUT.mkdir(parents=True, exist_ok=True)
    rows = []
    counts = []
    centers = rng.standard_normal((len(TOPICS), DIM))
    centers *= 3.0 / np.linalg.norm(centers, axis=1, keepdims=True)
    for c, (name, words) in zip(centers, TOPICS.items()):
        for w in words.split():
            rows.append((w, c + 0.6 * rng.standard_normal(DIM)))
            counts.append((w, int(rng.integers(40, 1500))))
    stop_center = 0.8 * rng.standard_normal(DIM)
    for w, n in zip(FUNCTION, FUNCTION_COUNTS):
        rows.append((w, stop_center + 0.5 * rng.standard_normal(DIM)))
        counts.append((w, n))
    with open(OUT / "vectors.txt", "w", encoding="utf-8") as fh:
        fh.write(f"{len(rows)} {DIM}\n")
        for w, v in rows:
            fh.write(w + " " + " ".join(f"{x:.6f}" for x in v) + "\n")
    with open(OUT / "freq.txt", "w", encoding="utf-8") as fh:
        for w, n in sorted(counts, key=lambda t: -t[1]):
            fh.write(f"{w}\t{n}\n")
    with open(OUT / "sts.tsv", "w", encoding="utf-8") as fh:
        for gold, a, b in PAIRS:
            fh.write(f"{gold}\t{a}\t{b}\n")
    with open(OUT / "sentences.txt", "w", encoding="utf-8") as fh:
        seen = []
        for _, a, b in PAIRS:
            for s in (a, b):
                if s not in seen:
                    seen.append(s)
        fh.write("\n".join(seen) + "\n")


if __name__ == "__main__":
    main()
