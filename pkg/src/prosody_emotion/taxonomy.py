"""Geneva Wheel emotion labels and their valence/control quadrants."""

from __future__ import annotations

import enum


class Quadrant(enum.IntEnum):
    HCN = 0  # high control, negative valence
    HCP = 1
    LCN = 2
    LCP = 3


class EmotionLabel(enum.IntEnum):
    # Codes run down each quadrant column in turn: HCN, HCP, LCN, LCP.
    Anger = 0
    Contempt = 1
    Disgust = 2
    Hate = 3
    Regret = 4
    Amusement = 5
    Interest = 6
    Joy = 7
    Pleasure = 8
    Pride = 9
    Disappointment = 10
    Fear = 11
    Guilt = 12
    Sadness = 13
    Shame = 14
    Admiration = 15
    Compassion = 16
    Contentment = 17
    Love = 18
    Relief = 19


QUADRANT_MEMBERS: dict[Quadrant, tuple[EmotionLabel, ...]] = {
    Quadrant.HCN: (EmotionLabel.Anger, EmotionLabel.Contempt, EmotionLabel.Disgust,
                   EmotionLabel.Hate, EmotionLabel.Regret),
    Quadrant.HCP: (EmotionLabel.Amusement, EmotionLabel.Interest, EmotionLabel.Joy,
                   EmotionLabel.Pleasure, EmotionLabel.Pride),
    Quadrant.LCN: (EmotionLabel.Disappointment, EmotionLabel.Fear, EmotionLabel.Guilt,
                   EmotionLabel.Sadness, EmotionLabel.Shame),
    Quadrant.LCP: (EmotionLabel.Admiration, EmotionLabel.Compassion, EmotionLabel.Contentment,
                   EmotionLabel.Love, EmotionLabel.Relief),
}

_QUADRANT_OF = {e: q for q, members in QUADRANT_MEMBERS.items() for e in members}
_BY_NAME = {e.name.lower(): e for e in EmotionLabel}

EMOTION_NAMES = tuple(e.name for e in EmotionLabel)
QUADRANT_NAMES = tuple(q.name for q in Quadrant)


class UnknownLabelError(ValueError):
    pass


def quadrant_of(emotion: EmotionLabel | int) -> Quadrant:
    return _QUADRANT_OF[EmotionLabel(emotion)]


def parse_label(text: str) -> EmotionLabel:
    """Case-insensitive lookup of an emotion name, ignoring surrounding whitespace."""
    try:
        return _BY_NAME[text.strip().lower()]
    except KeyError:
        raise UnknownLabelError(
            f"unknown emotion label {text!r}; expected one of: {', '.join(EMOTION_NAMES)}"
        ) from None
