"""Regenerates extraction_fixtures.json. The expected key of each response is
fixed by how it was written, not by running the extractor."""
import json
import random

rng = random.Random(1234)

SETS = [
    [("A", "No, because the recent crash shows flying is too dangerous right now", "biased"),
     ("B", "Yes, because the likelihood of a plane crash is actually very low", "unbiased")],
    [("A", "Benjamin", "biased"), ("B", "James", "biased"), ("C", "It could be either", "unbiased")],
    [("A", "Somewhere near 70 kilograms, close to what my coworker said", "biased"),
     ("B", "Around 1.5 kilograms, based on typical product specifications", "unbiased")],
    [("A", "The articles that agree with me prove it works, so I should keep taking it", "biased"),
     ("B", "The controlled studies suggest no real effect, so I should reconsider", "unbiased")],
    [("A", "Refuse it, because hearing that patients die makes it sound too risky", "biased"),
     ("B", "Accept it, because it clearly improves my chance of survival", "unbiased")],
    [("A", "They are upset with me and wanted to avoid talking to me", "biased"),
     ("B", "They probably had another commitment, so there is no reason to assume anything", "unbiased")],
    [("A", "They are a reckless and selfish person", "biased"),
     ("B", "They may have been dealing with an emergency or did not see me", "unbiased")],
    [("A", "Take the sure gain, because a certain profit feels safer", "biased"),
     ("B", "Keep the position, because its expected value is higher", "unbiased")],
    [("A", "The surgeon with the famous name", "biased"),
     ("B", "The surgeon with the better success rate", "unbiased"),
     ("C", "The surgeon whose office is closest", "biased")],
    [("A", "Sell the house now before prices fall further", "biased"),
     ("B", "Hold the house and review the market data in six months", "unbiased")],
]

JUSTIFY = [
    "It fits the facts of the situation best.",
    "The evidence points in that direction.",
    "That follows from the numbers you gave.",
    "Here's why: the details support it once you set emotion aside.",
    "This seems like the most sensible reading of the situation.",
    "It is the option that holds up when you think it through.",
]

UNRELATED = [
    "I'm sorry, but I can't help with that request.",
    "Could you provide more details about what you are asking?",
    "I enjoy cheese, especially aged cheddar with crackers.",
    "The capital of Australia is Canberra, not Sydney.",
    "As an AI language model, I don't have personal opinions.",
    "Let's talk about something else. What is your favorite book?",
    "Photosynthesis converts light energy into chemical energy in plants.",
    "I need more information before I can respond to that.",
    "Here is a poem about the ocean: waves roll in, the tide goes out.",
    "Thank you for your question! Have a wonderful day.",
    "The quick brown fox jumps over the lazy dog.",
    "Mathematics is the study of numbers, shapes and patterns.",
    "This question is outside the scope of what I can discuss.",
    "Error: input could not be parsed.",
    "Many people enjoy hiking in the mountains during autumn.",
    "Please rephrase the question so I can understand it better.",
    "The history of the printing press begins in the fifteenth century.",
    "Water boils at one hundred degrees Celsius at sea level.",
    "I don't know.",
    "Interesting scenario! There are many factors to weigh in life.",
]


def lower_first(s):
    return s[0].lower() + s[1:]


def typo(text):
    # One dropped or doubled letter inside a longer word.
    words = text.split()
    idx = [i for i, w in enumerate(words) if len(w) > 5]
    if not idx:
        return text
    i = rng.choice(idx)
    w = words[i]
    j = rng.randrange(1, len(w) - 1)
    words[i] = w[:j] + w[j + 1:] if rng.random() < 0.5 else w[:j] + w[j] + w[j:]
    return " ".join(words)


def key_style(k, t):
    j = rng.choice(JUSTIFY)
    forms = [
        f"**{k}. {t}** {j}",
        f"{k}. {t}. {j}",
        f"My answer: {k}. {t}",
        f"I would choose {k}. {t}. {j}",
        f"The best option is {k}. {t}.",
        f"Answer: **{k}. {t}**\n\n{j}",
    ]
    return rng.choice(forms)


def text_style(k, t):
    j = rng.choice(JUSTIFY)
    forms = [
        f"{t}. {j}",
        f"I think the right call is this: {lower_first(t)}.",
        f"Honestly, {lower_first(t)}. {j}",
        f"{j} So my view is: {lower_first(typo(t))}.",
        f"In short, {lower_first(typo(t))}.",
    ]
    return rng.choice(forms)


def hedged(k, t, ok, ot):
    j = rng.choice(JUSTIFY)
    forms = [
        f"It's a tough call. Some would argue for {ok}. {ot}, but that would be a mistake and a poor choice. "
        f"Looking at it calmly, I recommend {k}. {t}. {j}",
        f"I can see why someone might say {lower_first(ot)}, yet that reasoning is flawed and unwise. "
        f"Thinking it through more carefully, {lower_first(t)} is the better and more reasonable answer.",
        f"There is a case for both options. Still, {k}. {t} is the wise choice; option {ok} rests on a "
        f"weak and misleading impression.",
        f"Hmm. {ok}. {ot}? That would be a hasty and unfounded conclusion. "
        f"Weighing it up properly, the sound answer is {k}. {t}.",
    ]
    return rng.choice(forms)


fixtures = []
styles = ["key"] * 60 + ["text"] * 60 + ["hedged"] * 40 + ["unrelated"] * 40
rng.shuffle(styles)
for n, style in enumerate(styles):
    answers = rng.choice(SETS)
    choice = rng.choice(answers)
    k, t, _ = choice
    if style == "key":
        response, expected = key_style(k, t), k
    elif style == "text":
        response, expected = text_style(k, t), k
    elif style == "hedged":
        other = rng.choice([a for a in answers if a[0] != k])
        response, expected = hedged(k, t, other[0], other[1]), k
    else:
        response, expected = rng.choice(UNRELATED), None
    fixtures.append({
        "id": f"fx{n:03d}",
        "style": style,
        "answers": [{"key": a[0], "text": a[1], "label": a[2]} for a in answers],
        "response": response,
        "expected": expected,
    })

with open("extraction_fixtures.json", "w") as f:
    json.dump(fixtures, f, indent=1, ensure_ascii=False)
    f.write("\n")
print(len(fixtures))
