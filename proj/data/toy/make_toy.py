#!/usr/bin/env python3
"""Regenerates the toy corpus, lexicons, survey and mock model outputs.

Run from anywhere: python3 data/toy/make_toy.py
Output is deterministic; the committed files are the output of this script.
"""

import json
import math
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent
SEED = 20240611

# cue -> associates, most typical first. Several associates are cues
# themselves so two-step neighbourhoods exist.
ASSOCIATIONS = {
    "dog": ["cat", "bark", "pet", "puppy", "bone", "friend", "leash", "tail", "walk", "loyal", "house", "food", "fur", "run"],
    "cat": ["dog", "mouse", "meow", "pet", "fur", "kitten", "milk", "whiskers", "purr", "tail", "house", "sleep", "claw"],
    "house": ["home", "family", "roof", "door", "building", "room", "window", "garden", "city", "money", "dog", "warm", "bed"],
    "tree": ["leaf", "green", "forest", "wood", "branch", "mountain", "bird", "shade", "root", "apple", "river", "tall", "nature"],
    "water": ["drink", "river", "blue", "wet", "tea", "sea", "rain", "fire", "ice", "life", "clean", "cold", "swim"],
    "fire": ["hot", "water", "burn", "red", "flame", "smoke", "danger", "war", "warm", "light", "wood", "sun", "camp"],
    "sun": ["moon", "hot", "light", "sky", "day", "yellow", "summer", "fire", "warm", "bright", "star", "beach", "morning"],
    "moon": ["sun", "night", "star", "sky", "festival", "light", "round", "space", "dark", "cake", "river", "dream", "silver"],
    "family": ["love", "home", "house", "mother", "father", "friend", "children", "together", "food", "festival", "warm", "care", "money"],
    "friend": ["family", "love", "trust", "dog", "school", "together", "help", "fun", "loyal", "talk", "music", "peace", "share"],
    "money": ["work", "rich", "bank", "power", "city", "car", "house", "gold", "spend", "family", "poor", "war", "paper"],
    "work": ["money", "job", "office", "tired", "computer", "school", "city", "boss", "busy", "road", "doctor", "hard", "car"],
    "school": ["book", "teacher", "student", "work", "learn", "friend", "class", "exam", "study", "computer", "music", "city", "bus"],
    "book": ["read", "school", "paper", "story", "library", "page", "music", "learn", "word", "teacher", "computer", "tea", "quiet"],
    "music": ["song", "dance", "sound", "book", "festival", "piano", "happy", "friend", "school", "loud", "love", "guitar", "peace"],
    "food": ["rice", "eat", "hungry", "family", "tea", "dinner", "cook", "festival", "delicious", "water", "meat", "dog", "market"],
    "rice": ["food", "white", "eat", "bowl", "field", "tea", "water", "farm", "family", "grain", "festival", "cook", "river"],
    "tea": ["drink", "water", "green", "cup", "hot", "rice", "morning", "leaf", "food", "book", "calm", "friend", "mountain"],
    "city": ["car", "building", "road", "people", "busy", "work", "house", "noise", "money", "school", "night", "river", "light"],
    "road": ["car", "city", "street", "long", "travel", "walk", "map", "mountain", "work", "river", "bus", "dark", "home"],
    "car": ["road", "drive", "city", "fast", "money", "wheel", "work", "travel", "red", "bus", "fire", "noise", "computer"],
    "love": ["heart", "family", "friend", "happy", "peace", "kiss", "warm", "music", "care", "moon", "red", "war", "together"],
    "war": ["peace", "fight", "death", "fire", "army", "gun", "blood", "money", "fear", "history", "city", "love", "danger"],
    "peace": ["war", "love", "calm", "quiet", "happy", "friend", "music", "dove", "family", "harmony", "mountain", "tea", "river"],
    "dragon": ["fire", "festival", "china", "power", "legend", "mountain", "sky", "river", "moon", "red", "war", "dream", "gold"],
    "festival": ["family", "food", "music", "moon", "happy", "celebrate", "dragon", "red", "friend", "light", "cake", "rice", "city"],
    "mountain": ["high", "river", "tree", "climb", "snow", "tea", "peace", "road", "cold", "dragon", "sky", "rock", "green"],
    "river": ["water", "mountain", "fish", "flow", "tree", "road", "boat", "city", "moon", "long", "rice", "dragon", "peace"],
    "doctor": ["hospital", "nurse", "sick", "work", "help", "medicine", "money", "school", "care", "health", "computer", "white", "family"],
    "computer": ["work", "internet", "game", "screen", "school", "book", "money", "car", "fast", "music", "office", "doctor", "city"],
}

# Words with a plural surface form in model outputs.
LEMMAS = {"dogs": "dog", "cats": "cat", "trees": "tree", "cars": "car", "books": "book", "friends": "friend",
          "leaves": "leaf", "rivers": "river", "mountains": "mountain", "songs": "song", "stars": "star",
          "houses": "house", "children": "child", "festivals": "festival", "roads": "road"}

# Generic words a weak model tends to produce regardless of the cue.
GENERIC = ["thing", "nice", "good", "life", "world", "time", "people", "big", "small", "new", "important", "idea"]

COUNTRIES = [("United States", "English"), ("China", "Chinese"), ("United Kingdom", "English"), ("Singapore", "Chinese")]
PARTICIPANTS_PER_CUE = 24


def zipf_weights(n):
    return [1.0 / (i + 1) ** 1.1 for i in range(n)]


def weighted_sample_without_replacement(rng, items, weights, k):
    pool = list(zip(items, weights))
    out = []
    for _ in range(min(k, len(pool))):
        total = sum(w for _, w in pool)
        x = rng.random() * total
        acc = 0.0
        for i, (item, w) in enumerate(pool):
            acc += w
            if x <= acc:
                out.append(item)
                pool.pop(i)
                break
    return out


def write_corpus(rng):
    lines = ["participantId\tcountry\tnativeLanguage\tcue\tresponsePosition\tresponse"]
    pid = 0
    for cue in sorted(ASSOCIATIONS):
        assoc = ASSOCIATIONS[cue]
        weights = zipf_weights(len(assoc))
        for _ in range(PARTICIPANTS_PER_CUE):
            pid += 1
            country, native = COUNTRIES[rng.randrange(len(COUNTRIES))]
            picks = weighted_sample_without_replacement(rng, assoc, weights, 3)
            for pos, word in enumerate(picks, start=1):
                # Mixed case and stray spaces exercise normalization.
                if rng.random() < 0.05:
                    word = word.capitalize()
                if rng.random() < 0.03:
                    word = " " + word
                lines.append(f"P{pid:04d}\t{country}\t{native}\t{cue}\tR{pos}\t{word}")
    (OUT / "corpus.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")


def vocabulary():
    words = set(ASSOCIATIONS)
    for assoc in ASSOCIATIONS.values():
        words.update(assoc)
    words.update(GENERIC)
    return sorted(words)


def write_lexicons(rng):
    vocab = vocabulary()
    rows = {"valence": [], "arousal": [], "concreteness": []}
    for word in vocab:
        if rng.random() < 0.88:
            rows["valence"].append((word, round(rng.uniform(1.5, 8.5), 2)))
        if rng.random() < 0.85:
            rows["arousal"].append((word, round(rng.uniform(1.5, 8.0), 2)))
        if rng.random() < 0.9:
            rows["concreteness"].append((word, round(rng.uniform(1.2, 5.0), 2)))
    for name, entries in rows.items():
        text = "word\tscore\n" + "".join(f"{w}\t{s}\n" for w, s in entries)
        (OUT / f"{name}.tsv").write_text(text, encoding="utf-8")
    scales = {
        "valence": {"sourceMin": 1, "sourceMax": 9, "targetMin": 1, "targetMax": 9, "inverted": False},
        "arousal": {"sourceMin": 1, "sourceMax": 9, "targetMin": 1, "targetMax": 9, "inverted": False},
        "concreteness": {"sourceMin": 1, "sourceMax": 5, "targetMin": 1, "targetMax": 5, "inverted": False},
    }
    for name, spec in scales.items():
        (OUT / f"{name}.scale.json").write_text(json.dumps(spec, indent=2) + "\n", encoding="utf-8")
    (OUT / "lemmas.tsv").write_text(
        "surface\tlemma\n" + "".join(f"{s}\t{l}\n" for s, l in sorted(LEMMAS.items())), encoding="utf-8")


def pluralize(word):
    for surface, lemma in LEMMAS.items():
        if lemma == word:
            return surface
    return word


def perturbed(rng, words, swaps):
    words = list(words)
    for _ in range(swaps):
        i = rng.randrange(len(words) - 1)
        words[i], words[i + 1] = words[i + 1], words[i]
    return words


def write_generations(rng):
    vanilla, sft = [], []
    for cue in sorted(ASSOCIATIONS):
        assoc = ASSOCIATIONS[cue]
        # Vanilla: half of the typical associates in scrambled order, padded
        # with generic words.
        core = rng.sample(assoc, len(assoc) // 2)
        words = core + rng.sample(GENERIC, 6)
        rng.shuffle(words)
        vanilla.append({"cue": cue, "rawText": ", ".join(words), "modelName": "toy-vanilla"})
        # SFT: most associates in nearly human order, a few plural surface forms.
        words = perturbed(rng, assoc[:11], 3) + rng.sample(GENERIC, 2)
        words = [pluralize(w) if rng.random() < 0.2 else w for w in words]
        sft.append({"cue": cue, "words": words, "modelName": "toy-sft"})
    write_jsonl("vanilla_generations.jsonl", vanilla)
    write_jsonl("sft_generations.jsonl", sft)


def write_rankings(rng, table):
    for name, swaps in (("vanilla", 12), ("sft", 2)):
        rows = []
        for cue in sorted(table):
            top = table[cue][:10]
            if len(top) < 10:
                continue
            order = perturbed(rng, top, swaps)
            body = "\n".join(f"Rank {i}: {w}" for i, w in enumerate(order, start=1))
            rows.append({"cue": cue, "rawText": "Let me think about typical associations.\n\nFinal Ranking:\n" + body,
                         "modelName": f"toy-{name}"})
        write_jsonl(f"{name}_rankings.jsonl", rows)


def human_table():
    """Aggregates corpus.tsv the way the ingest step does (trim + lower)."""
    counts = {}
    lines = (OUT / "corpus.tsv").read_text(encoding="utf-8").splitlines()[1:]
    for line in lines:
        cells = line.split("\t")
        cue, response = cells[3].strip(), cells[5].strip().lower()
        counts.setdefault(cue, {}).setdefault(response, 0)
        counts[cue][response] += 1
    return {cue: [w for w, _ in sorted(c.items(), key=lambda kv: (-kv[1], kv[0]))] for cue, c in counts.items()}


# Fixed distributions for five questions: US, CN, and a 7B model before
# (vanilla) and after (sft) fine-tuning on Chinese associations.
FIXED = [
    ("Q149", "Most people consider both freedom and equality important, but if you had to choose between them, "
             "which would you consider more important?", "politics", ["Freedom", "Equality"],
     [0.77, 0.23], [0.34, 0.66], [0.83, 0.17], [0.33, 0.67]),
    ("Q168", "In which of the following do you believe, if you believe in any? - Heaven", "religion", ["Yes", "No"],
     [0.65, 0.35], [0.12, 0.88], [0.71, 0.29], [0.18, 0.82]),
    ("Q165", "In which of the following do you believe, if you believe in any? - God", "religion", ["Yes", "No"],
     [0.79, 0.21], [0.17, 0.83], [0.41, 0.59], [0.29, 0.71]),
    ("Q118", "How often do ordinary people in your neighborhood have to pay a bribe, give a gift, or do a favor to "
             "local officials/service-providers to get needed services?", "corruption",
     ["Never", "Rarely", "Frequently", "Always"],
     [0.28, 0.55, 0.15, 0.02], [0.04, 0.34, 0.36, 0.26], [0.33, 0.55, 0.10, 0.02], [0.05, 0.19, 0.67, 0.10]),
    ("Q166", "In which of the following do you believe, if you believe in any? - Life after death", "religion",
     ["Yes", "No"], [0.69, 0.31], [0.12, 0.88], [0.90, 0.10], [0.36, 0.64]),
]

# Synthetic questions with respondent counts.
SYNTHETIC = [
    ("T01", "How important is family in your life?", "social values",
     ["Very important", "Rather important", "Not very important", "Not at all important"],
     [880, 100, 15, 5], [820, 160, 15, 5]),
    ("T02", "How important is leisure time in your life?", "social values",
     ["Very important", "Rather important", "Not very important", "Not at all important"],
     [420, 460, 100, 20], [150, 480, 320, 50]),
    ("T03", "Generally speaking, would you say that most people can be trusted?", "trust",
     ["Most people can be trusted", "Need to be very careful"], [370, 630], [630, 370]),
    ("T04", "How much do you trust people you meet for the first time?", "trust",
     ["Completely", "Somewhat", "Not very much", "Not at all", "Don't know"],
     [30, 400, 450, 120, 25], [10, 150, 560, 280, 60]),
    ("T05", "How proud are you to be of your nationality?", "national identity",
     ["Very proud", "Quite proud", "Not very proud", "Not at all proud"], [560, 320, 90, 30], [500, 420, 65, 15]),
    ("T06", "Work should always come first, even if it means less spare time.", "work",
     ["Agree strongly", "Agree", "Neither", "Disagree", "Disagree strongly"],
     [80, 250, 300, 280, 90], [150, 420, 250, 150, 30]),
    ("T07", "How interested would you say you are in politics?", "politics",
     ["Very interested", "Somewhat interested", "Not very interested", "Not at all interested"],
     [200, 420, 260, 120], [110, 350, 390, 150]),
]


def write_survey_and_scores(rng):
    survey, vanilla, sft = [], [], []
    for qid, text, topic, labels, us, cn, van, tuned in FIXED:
        options = [str(i + 1) for i in range(len(labels))]
        survey.append({"id": qid, "text": text, "topic": topic, "options": options, "labels": labels,
                       "populations": {"US": {"probs": us}, "CN": {"probs": cn}}})
        vanilla.append({"questionId": qid, "optionSymbols": options, "probs": van, "modelName": "toy-vanilla"})
        sft.append({"questionId": qid, "optionSymbols": options, "probs": tuned, "modelName": "toy-sft"})
    for qid, text, topic, labels, us, cn in SYNTHETIC:
        options = [str(i + 1) for i in range(len(labels))]
        entry = {"id": qid, "text": text, "topic": topic, "options": options, "labels": labels,
                 "populations": {"US": us, "CN": cn}}
        ordinal = options
        if labels[-1] == "Don't know":
            entry["nonOrdinal"] = [options[-1]]
            ordinal = options[:-1]
            us, cn = us[:-1], cn[:-1]
        survey.append(entry)
        us_p = [c / sum(us) for c in us]
        cn_p = [c / sum(cn) for c in cn]
        for rows, pull, model in ((vanilla, 0.15, "toy-vanilla"), (sft, 0.7, "toy-sft")):
            # Mixture of US and CN answers plus noise, reported as log-scores.
            probs = [(1 - pull) * a + pull * b for a, b in zip(us_p, cn_p)]
            logs = [math.log(max(p * rng.uniform(0.8, 1.25), 1e-6)) for p in probs]
            rows.append({"questionId": qid, "optionSymbols": ordinal, "logScores": [round(x, 6) for x in logs],
                         "modelName": model})
    (OUT / "survey.json").write_text(json.dumps(survey, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    write_jsonl("vanilla_option_scores.jsonl", vanilla)
    write_jsonl("sft_option_scores.jsonl", sft)


def write_jsonl(name, rows):
    (OUT / name).write_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows), encoding="utf-8")


def main():
    rng = random.Random(SEED)
    write_corpus(rng)
    write_lexicons(rng)
    write_generations(rng)
    write_rankings(rng, human_table())
    write_survey_and_scores(rng)


if __name__ == "__main__":
    main()
