#!/usr/bin/env python3
"""Generate the bundled fixture corpora and their EMB1 embeddings.

The corpora are synthetic, verse-structured English texts written for this
repository and released into the public domain. Every verse draws most of its
content words from one planted theme, plus a few corpus-wide frequent words,
function words and a sprinkling of archaic pronouns.

The embeddings come from a small deterministic "planted lexicon" encoder:
each theme owns a random unit direction, a theme word vector is that
direction plus word-specific noise, and every other word gets a random unit
vector. A text is embedded as the normalised mean of its non-stopword word
vectors. Documents and words therefore live in one joint space, which is
what the topic pipeline expects from a sentence encoder.

Usage: python3 tools/make_fixtures.py [--out fixtures]
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import re
import struct
from pathlib import Path

import numpy as np

ENCODER_ID = "planted-lexicon-v1"
DIM = 128
WORD_NOISE = 0.6

THEMES: dict[str, str] = {
    "battle": """battle chariot conch warrior army bow arrow banner kinsmen weapons archer sword shield
        trumpet drums horses charioteer general troops enemy foe combat valor slaughter fight victory defeat
        kingdom throne prince grandsire cousins ranks formation spear mace armor helmet camp march siege
        command clan alliance retreat herald plain hosts bannermen wounds""",
    "wisdom": """wisdom knowledge understanding insight discernment learning scripture intellect reason
        clarity doubt ignorance delusion confusion lamp darkness illumination vision truth falsehood
        teaching doctrine study inquiry question answer student master lesson memory judgment sense
        prudence reflection contemplation realization awareness perception recognition certainty
        conviction thought argument proof testimony witness sight learner scholar seeker""",
    "duty": """dharma obligation calling vocation station caste role service obedience law righteousness
        virtue conduct rule custom tradition ritual ordinance precept prescribed allotted proper fitting
        honor disgrace shame blame merit demerit sin fault wrong justice order harmony discipline
        responsibility burden task labor work worker performer deed deeds doer undertaking effort
        diligence steadfastness stewardship allegiance""",
    "renunciation": """renunciation detachment desire craving attachment fruit fruits recompense gain loss
        indifference equanimity sacrifice offering abandonment relinquishment forsaking surrender
        release freedom bondage chains fetters ascetic hermit forest solitude silence austerity fasting
        vow restraint abstinence simplicity poverty wanderer begging bowl robe cinders stillness
        retreating tortoise limbs senses objects contact pleasure pain longing""",
    "devotion": """devotion worship love bhakti devotee adoration praise hymn prayer chant canticle flower
        leaf droplet offeringbowl incense altar temple shrine image idol garland lamplight bell pilgrim
        pilgrimage grace mercy refuge shelter compassion tenderness beloved friend companion faith
        trust loyalty yearning tears joy bliss rapture ecstasy surrendering humility meekness
        gratitude reverence awe remembrance devotedness""",
    "meditation": """meditation yoga posture seat breathcontrol concentration focus absorption trance
        samadhi gaze nose tip eyebrows spine neck steady lamplike windless flame cushion grass deer
        skin cloth clean place secluded practice practitioner yogi abiding dwelling stillmind
        calmness serenity tranquility quietude repose equipoise balance moderation slumber vigil eating
        recreation habit regularity patience perseverance mastery""",
    "creation": """creation cosmos universe origin beginning dissolution cycle ages eons aeon day night
        thousand epochs manifest unmanifest seed womb father mother creatures beings species elements
        earth blaze air ether space sky sun lunar stars planets sea mountains streamlets trees plants
        animals birds serpents demons gods celestials genii sages seers progenitors forefathers
        lineage descendants emanation projection""",
    "gunas": """gunas sattva rajas tamas goodness passion inertia purity brightness restlessness greed
        activity dullness sloth heedlessness negligence laziness drowsiness radiance lightness heaviness
        binding qualities modes nature prakriti temperament disposition tendency inclination character
        food diet flavor sour bitter salty spicy stale rotten pungent sweet savory oily wholesome juicy
        nourishing agreeable rich parched burning""",
    "immortality": """immortality eternal everlasting unborn undying imperishable indestructible
        changeless permanent body bodies garments clothes worn blades cleave burn wet arid wind
        dwellerinbody embodied embodiment childhood youth oldage transition rebirth births
        reincarnation transmigration passing departing sorrow mourning lament unmanifested
        unthinkable unchangeable ancient primeval firm stable allpervading immovable everpresent
        deathless timeless ageless tenant dweller""",
    "vision": """form cosmic universal mouths eyes arms bellies faces crowns ornaments garlands
        necklaces mighty terrible dazzling blazing splendor brilliance suns fangs jaws teeth
        devouring consuming moths flaring rushing torrents seas heroes tremble quaking fear terror
        bristling astonishment wonder amazement countless infinite boundless endless beginningless
        middle end multitude sights spectacle manifestation appearance awesome majestic frightful""",
    "food": """harvest grain rice barley wheat milk butter ghee honey orchard mango banana
        grapes figs dates cooking kitchen hearth oven bread cakes sweets feast banquet guests host
        hospitality plate cup jar cauldron ladle spoon share sharing hunger thirst appetite nourishment
        sustenance showers clouds fields farmer plough oxen cattle cow herd pasture granary storehouse
        abundance plenty famine drought""",
    "speech": """speech words truthful pleasant beneficial harsh gentle soft kind vows promise
        oath mantra syllable sound voice whisper shout recitation reading chanting verse
        verses meter rhythm melody poet poem ballad language grammar meaning utterance sentence
        phrase discourse dialogue conversation debate dispute quarrel slander gossip lies
        flattery sincerity candor eloquence tongue lips""",
    "time": """time moments hours seasons years springtime summer autumn winter solstice equinox dawn
        dusk twilight noon midnight morning evening calendar month fortnight waxing waning path
        northern southern haze departure return journey crossing ferry bridge road way traveler
        destination arrival destiny fate fortune chance luck omen sign portent future past present
        hourglass sundial epoch""",
    "governance": """king ruler minister court council counsel advisor decree edict tax
        treasury coffers wealth riches bullion silver jewels gems pearls coins merchant trade market
        bazaar caravan city town village gates walls palace fortress citizens subjects people realm
        province boundary border envoy ambassador treaty peace punishment prison sceptre crown
        magistrate
        viceroy chancellor tribute levy""",
    "breathvital": """prana apana vyana udana samana vital airs exhale inhalation lungs nostrils
        heartbeat pulse veins channels nadis currents energy vitality strength vigor stamina fatigue
        exhaustion sleepless dreamless dreaming dreamer deep sleeper fourth witnessing
        consciousness sheath sheaths layers coverings cave cavity lotus thumb sized flamelike smokeless
        dwellingplace inner innermost wakefulness
        diaphragm respiration vitalforce rhythmic""",
    "sacrificefire": """altarfire agni oblation ladleful priests hotri adhvaryu udgatri chanters
        soma pressing stones juice vessels fuel kindling sticks logs tongues smokecolumn
        embers hearthfire brahmin brahmins fees gifts kine stallion horse sacrificer patron
        rite rites ceremony ceremonies hymns stanzas saman rik yajus offerings libation ashen
        pyreside sacrificial officiant
        ghee_ladle firepit sacrificialpost yupa invocation svaha vedi""",
    "teacherpupil": """guru pupil disciple initiation approached approaching humble asking
        questioner replied instructed instruction teachings secret secrets hidden mystery mysteries
        revealed revelation worthy unworthy tested testing tending herding hundred thousandcows
        returned sent sends son satyakama jabala nachiketa yama uddalaka svetaketu gargi
        yajnavalkya janaka debaters tutor schooling apprentice apprenticeship
        hermitage lessons mentor novice acolyte recite pupils""",
    "rivers": """river flowing oceanic merging names forms waves foam spray current banks shore
        source wellspring peak valley stream streams brook lake pond tank well raindrops
        mist dew salt dissolved lump clay ornament iron tools sparks spider thread web
        seedling banyan roots branches leaves tributary estuary delta confluence riverbed
        ganga yamuna sarasvati rapids whirlpool eddy""",
    "death": """deathlord dying corpse funeral pyre cremation departed fathers gloom reborn worms
        insects widow mourners lamentations graveyard boneyard bones skull dust mortality perishable
        transient fleeting impermanent decay aging sickness disease old wrinkled gray dimming frail
        staff crutch bedridden last grave shroud tomb coffin bier dirge elegy requiem
        burial mausoleum epitaph ghost wake cemetery mortal""",
}

GENERIC = {
    "gita": [("self", 0.52), ("arjuna", 0.44), ("krishna", 0.40), ("action", 0.36), ("mind", 0.30),
             ("lord", 0.14), ("world", 0.10), ("man", 0.10), ("heart", 0.08), ("life", 0.08)],
    "upanishads": [("self", 0.50), ("brahman", 0.42), ("know", 0.25), ("mind", 0.18), ("breath", 0.14),
                   ("sage", 0.12), ("world", 0.10), ("death", 0.10), ("heart", 0.08), ("light", 0.08)],
}

GITA_THEMES = ["battle", "wisdom", "duty", "renunciation", "devotion", "meditation", "creation", "gunas",
               "immortality", "vision", "food", "speech", "time", "governance"]
UPANISHAD_THEMES = ["wisdom", "renunciation", "devotion", "meditation", "creation", "immortality", "speech",
                    "time", "breathvital", "sacrificefire", "teacherpupil", "rivers", "death"]

GITA_CHAPTERS = [47, 72, 43, 42, 29, 47, 30, 28, 34, 42, 55, 20, 34, 27, 20, 24, 28, 78]
UPANISHAD_BOOKS = [("Isha", 18), ("Kena", 35), ("Katha", 119), ("Prashna", 67), ("Mundaka", 64),
                   ("Mandukya", 12), ("Taittiriya", 53), ("Aitareya", 33), ("Chandogya", 154),
                   ("Brihadaranyaka", 171), ("Svetasvatara", 113), ("Kaushitaki", 1)]

DETERMINERS = ["the", "a", "this", "that", "any", "each", "his", "their", "our", "no", "some", "all"]
PREPOSITIONS = ["of", "in", "with", "by", "from", "to", "for", "through", "upon", "into", "over", "under", "about"]
CONNECTIVES = ["and", "or", "but", "yet", "so", "nor", "as", "while", "when", "where", "because", "then"]
ARCHAIC = [["thou", "art"], ["thy"], ["thee"], ["hath"], ["thine"], ["doth"], ["ye", "shall"], ["thou", "hast"]]
CLAUSE_END = [",", ",", ",", ";", ";", ":", "."]

NON_ASCII_NOISE = ["—", " ", "’"]


def theme_words(name: str) -> list[str]:
    words = []
    for raw in THEMES[name].split():
        word = re.sub(r"[^a-z]", "", raw.lower())
        if word and word not in words:
            words.append(word)
    return words


def load_stopwords(root: Path) -> set[str]:
    words = set()
    for line in (root / "assets" / "stopwords_en.txt").read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line)
    return words


def check_lexicon(stopwords: set[str]) -> None:
    owner: dict[str, str] = {}
    generic = {w for table in GENERIC.values() for w, _ in table}
    for name in THEMES:
        words = theme_words(name)
        if len(words) < 50:
            raise SystemExit(f"theme {name} has only {len(words)} words")
        for w in words:
            if w in stopwords or w in generic:
                raise SystemExit(f"theme word {w!r} ({name}) collides with a stopword or generic word")
            if w in owner:
                raise SystemExit(f"theme word {w!r} appears in {owner[w]} and {name}")
            owner[w] = name


class Deck:
    """Deals words in shuffled rounds so every word recurs evenly."""

    def __init__(self, words: list[str], rng: np.random.Generator):
        self.words = list(words)
        self.rng = rng
        self.pile: list[str] = []

    def deal(self, n: int) -> list[str]:
        out: list[str] = []
        while len(out) < n:
            if not self.pile:
                self.pile = [self.words[i] for i in self.rng.permutation(len(self.words))]
            word = self.pile.pop()
            if word not in out:
                out.append(word)
            else:
                self.pile.insert(0, word)
        return out


def compose_verse(content: list[str], rng: np.random.Generator) -> tuple[str, list[str]]:
    """Returns surface text and the cleaned content tokens in order."""
    pieces: list[str] = []
    i = 0
    first = True
    if rng.random() < 0.35:
        archaic = ARCHAIC[rng.integers(len(ARCHAIC))]
        pieces.extend(w.capitalize() if j == 0 else w for j, w in enumerate(archaic))
        first = False
    while i < len(content):
        size = int(rng.integers(3, 6))
        chunk = content[i:i + size]
        i += size
        clause: list[str] = []
        if not first or rng.random() < 0.5:
            clause.append(CONNECTIVES[rng.integers(len(CONNECTIVES))] if not first else
                          DETERMINERS[rng.integers(len(DETERMINERS))])
        clause.append(chunk[0])
        if len(chunk) > 1:
            clause.append(PREPOSITIONS[rng.integers(len(PREPOSITIONS))])
            if rng.random() < 0.3:
                clause.append(DETERMINERS[rng.integers(len(DETERMINERS))])
            clause.extend(chunk[1:])
        if first:
            clause[0] = clause[0].capitalize()
            first = False
        end = CLAUSE_END[rng.integers(len(CLAUSE_END))] if i < len(content) else rng.choice([".", ".", "!", "?"])
        clause[-1] = clause[-1] + end
        if rng.random() < 0.08:
            clause[-1] = clause[-1] + NON_ASCII_NOISE[rng.integers(len(NON_ASCII_NOISE))]
        pieces.extend(clause)
    return " ".join(pieces), content


def make_verses(corpus: str, themes: list[str], counts: list[int], rng: np.random.Generator):
    decks = {name: Deck(theme_words(name), rng) for name in themes}
    generic = GENERIC[corpus]
    verses = []
    total = sum(counts)
    theme_of = [themes[i % len(themes)] for i in range(total)]
    theme_of = [theme_of[i] for i in rng.permutation(total)]
    k = 0
    for chapter, count in enumerate(counts, start=1):
        for verse in range(1, count + 1):
            theme = theme_of[k]
            k += 1
            content = decks[theme].deal(int(rng.integers(16, 22)))
            for word, p in generic:
                if rng.random() < p:
                    content.insert(int(rng.integers(len(content) + 1)), word)
            text, tokens = compose_verse(content, rng)
            verses.append({"chapter": chapter, "verse": verse, "theme": theme, "text": text, "tokens": tokens})
    return verses


class Encoder:
    def __init__(self, seed: int = 20240611):
        self.seed = seed
        self.cache: dict[str, np.ndarray] = {}
        self.theme_of = {w: name for name in THEMES for w in theme_words(name)}

    def _unit(self, key: str) -> np.ndarray:
        digest = hashlib.sha256(f"{self.seed}:{key}".encode()).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
        v = rng.standard_normal(DIM)
        return v / np.linalg.norm(v)

    def word(self, w: str) -> np.ndarray:
        if w not in self.cache:
            theme = self.theme_of.get(w)
            v = self._unit("word:" + w)
            if theme is not None:
                v = self._unit("theme:" + theme) + WORD_NOISE * v
                v = v / np.linalg.norm(v)
            self.cache[w] = v
        return self.cache[w]

    def text(self, tokens: list[str]) -> np.ndarray:
        v = np.mean([self.word(t) for t in tokens], axis=0)
        return v / np.linalg.norm(v)


def write_emb1(path: Path, ids: list[str], rows: np.ndarray) -> None:
    rows32 = np.asarray(rows, dtype="<f4")
    out = bytearray(b"EMB1")
    out += struct.pack("<II", len(ids), rows32.shape[1])
    for item, row in zip(ids, rows32):
        raw = item.encode("utf-8")
        out += struct.pack("<H", len(raw))
        out += raw
        out += row.tobytes()
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(bytes(out))
    os.replace(tmp, path)
    manifest = {
        "format": "EMB1",
        "model": ENCODER_ID,
        "dim": int(rows32.shape[1]),
        "count": len(ids),
        "sha256": hashlib.sha256(bytes(out)).hexdigest(),
    }
    Path(str(path) + ".manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def clean_tokens(text: str) -> list[str]:
    text = re.sub(r"[^\x00-\x7f]", " ", text)
    tokens = []
    for raw in text.split():
        tok = re.sub(r"[.,;:!?\"'()\[\]{}\-]", "", raw).lower()
        if tok:
            tokens.append(tok)
    return tokens


def build_corpus(out: Path, name: str, title: str, marker, themes, counts, seed: int, encoder: Encoder,
                 stopwords: set[str]) -> None:
    rng = np.random.default_rng(seed)
    verses = make_verses(name, themes, counts, rng)
    lines = [title, "A synthetic verse text generated for testing. Public domain.", ""]
    for v in verses:
        lines.append(f"{marker(v['chapter'], v['verse'])} {v['text']}")
    folder = out / name
    folder.mkdir(parents=True, exist_ok=True)
    (folder / f"{name}.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")

    ids = [f"{name}:{v['chapter']}.{v['verse']}" for v in verses]
    doc_rows = []
    vocab: list[str] = []
    seen = set()
    for v in verses:
        content = [t for t in clean_tokens(v["text"]) if t not in stopwords and t not in ARCHAIC_CLEAN]
        doc_rows.append(encoder.text(content))
        for t in clean_tokens(v["text"]):
            if t not in seen:
                seen.add(t)
                vocab.append(t)
    write_emb1(folder / f"{name}.docs.emb", ids, np.vstack(doc_rows))
    write_emb1(folder / f"{name}.words.emb", vocab, np.vstack([encoder.word(t) for t in vocab]))
    labels = {"id": ids, "theme": [v["theme"] for v in verses]}
    (folder / f"{name}.themes.json").write_text(json.dumps(labels, indent=1) + "\n")


ARCHAIC_CLEAN = {"thou", "thy", "thee", "hath", "art", "thine", "doth", "ye", "hast"}

COMMENTARY = [
    "On the opening scene. The reader meets two armies drawn up on a wide plain, and the archer at the "
    "centre loses heart before the first arrow is loosed. The scene is less about war than about the "
    "moment of hesitation that precedes any grave undertaking.",
    "On duty and action. The teacher does not tell the pupil to abandon work. He asks instead that work be "
    "done without clutching at its fruit. Many later readers took this as the heart of the whole text. "
    "Others have argued that the emphasis falls on knowledge, and that right action follows from seeing "
    "clearly. Both readings can be defended from the verses themselves, and the commentary tradition has "
    "never settled the question. What is plain is that the text treats inaction as no escape at all: even "
    "to sit still is to act, and the body cannot be kept alive for a single day without some kind of "
    "labour. The argument therefore turns from whether to act toward how to act, and the answer given is "
    "a discipline of attention in which the worker watches the work without grasping at its results. "
    "This short paragraph is deliberately long so that segmentation has to split it into several parts "
    "at sentence boundaries.",
    "On meditation. A quiet seat, a steady posture and a gaze held at one point are described in plain "
    "terms. The instructions are practical rather than mystical.",
    "On the vision. The great form shown to the archer is frightening as well as splendid. It devours the "
    "warriors of both sides, and the pupil begs to see the familiar friendly face again.",
]


def build_commentary(out: Path) -> None:
    folder = out / "commentary"
    folder.mkdir(parents=True, exist_ok=True)
    (folder / "commentary.txt").write_text("\n\n".join(COMMENTARY) + "\n", encoding="utf-8")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="fixtures")
    args = parser.parse_args()
    root = Path(__file__).resolve().parent.parent
    stopwords = load_stopwords(root)
    check_lexicon(stopwords)
    out = Path(args.out)
    encoder = Encoder()
    build_corpus(out, "gita", "The Song of the Field (synthetic verse edition)",
                 lambda c, v: f"{c}.{v}", GITA_THEMES, GITA_CHAPTERS, 700, encoder, stopwords)
    build_corpus(out, "upanishads", "Twelve Forest Teachings (synthetic verse edition)",
                 lambda c, v: f"({c}.{v})", UPANISHAD_THEMES, [n for _, n in UPANISHAD_BOOKS], 840, encoder,
                 stopwords)
    build_commentary(out)


if __name__ == "__main__":
    main()
