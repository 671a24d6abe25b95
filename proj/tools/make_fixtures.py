#!/usr/bin/env python3
"""Generate the synthetic sample corpora under samples/.

Each corpus draws documents from a fixed set of topics. A topic has its own
vocabulary and sentence templates, so documents on the same topic share
words and documents on different topics share almost none. Output is
deterministic for a given seed.

    python3 tools/make_fixtures.py samples
"""

import json
import random
import sys
from pathlib import Path

TOPICS = {
    "lobbying": {
        "names": ["Senator Hale", "Representative Ortiz", "the committee chair", "a trade association", "the lobbying firm"],
        "things": ["the tax bill", "the farm subsidy", "the energy amendment", "the budget resolution", "the zoning law"],
        "sentences": [
            "Human lobbyists rely on decades of experience to find strategic solutions to achieve a policy outcome.",
            "{name} met with lobbyists to discuss {thing} before the vote.",
            "Lobbyists for {name} argued that {thing} would protect local jobs.",
            "The legislature delayed the vote on {thing} after intense lobbying.",
            "Critics said the lobbying campaign around {thing} was unfair to small businesses.",
            "{name} said the amendment to {thing} won bipartisan support.",
            "Legislators received {num} letters from lobbyists about {thing}.",
            "The policy outcome for {thing} depended on a handful of swing votes in the legislature.",
            "Lobbying disclosure reports show {name} spent heavily on {thing}.",
            "Advocates praised the compromise on {thing} as a victory for voters.",
            "The lobbyists drafted language for {thing} that the committee adopted.",
            "{name} warned that {thing} faced a difficult path in the senate.",
        ],
        "summary": ["Lobbyists pressed legislators on {thing}.", "{name} said the vote on {thing} was close."],
    },
    "chatbots": {
        "names": ["OpenAI", "a research lab", "the startup", "a university team", "the developers"],
        "things": ["the chatbot", "the language model", "the assistant", "the model", "the new release"],
        "sentences": [
            "ChatGPT is a chatbot created by OpenAI that answers questions in plain language.",
            "{name} trained {thing} on a large collection of text from the internet.",
            "Users asked {thing} to write essays, code and poems.",
            "{name} said {thing} can still produce confident but wrong answers.",
            "Teachers worry that students use {thing} to complete homework.",
            "The chatbot gained {num} million users within weeks of launch.",
            "{name} released an update so {thing} refuses harmful requests.",
            "Researchers measured how often {thing} invents facts in its answers.",
            "Companies are building the chatbot into search engines and office software.",
            "{name} described {thing} as a tool that predicts the next word in a sentence.",
            "Critics argue {thing} repeats biases found in its training text.",
            "The language model answers follow-up questions and admits some mistakes.",
        ],
        "summary": ["{name} released {thing}, a chatbot that answers questions.", "Users praised the chatbot but critics noted mistakes."],
    },
    "storms": {
        "names": ["the weather service", "forecasters", "emergency managers", "the governor", "coastal officials"],
        "things": ["the hurricane", "the storm", "the tropical system", "the cyclone", "the flood"],
        "sentences": [
            "{name} warned that {thing} would bring heavy rain and strong wind to the coast.",
            "Residents boarded up windows as {thing} approached landfall.",
            "{thing} knocked out power to {num} thousand homes overnight.",
            "Flood water filled streets near the river after {thing} stalled.",
            "{name} ordered evacuations from low lying coastal towns.",
            "Rescue crews pulled stranded drivers from flooded roads.",
            "The storm surge damaged piers, boats and beach houses.",
            "{name} said the rainfall totals broke records set decades ago.",
            "Shelters opened in schools for families fleeing {thing}.",
            "Insurers estimated damage from {thing} at several billion dollars.",
            "Forecasters tracked the hurricane with satellites and reconnaissance aircraft.",
            "Wind gusts from {thing} toppled trees and power lines.",
        ],
        "summary": ["{thing} brought flooding and wind damage to the coast.", "{name} ordered evacuations as power failed."],
    },
    "football": {
        "names": ["the striker", "the goalkeeper", "the home side", "the manager", "the captain"],
        "things": ["the league match", "the cup final", "the derby", "the semifinal", "the title race"],
        "sentences": [
            "{name} scored twice in {thing} to lift the crowd.",
            "The goalkeeper made a late save to preserve the win in {thing}.",
            "{name} said the team defended well in the second half.",
            "Fans sang in the stadium as the club celebrated victory in {thing}.",
            "The referee awarded a penalty after a foul in the box during {thing}.",
            "{name} was injured in training and missed {thing}.",
            "The midfielder controlled possession with sharp passing.",
            "A header from a corner kick decided {thing} in stoppage time.",
            "{name} praised the supporters after {thing}.",
            "The club now sits {num} points clear at the top of the table.",
            "The visitors had a goal ruled offside early in {thing}.",
            "{name} signed a new contract with the club this season.",
        ],
        "summary": ["{name} helped the club win {thing}.", "A late goal and a save decided the match."],
    },
    "elections": {
        "names": ["the incumbent mayor", "the challenger", "election officials", "the party", "pollsters"],
        "things": ["the election", "the runoff", "the primary", "the ballot count", "the recount"],
        "sentences": [
            "{name} said turnout in {thing} reached a record high.",
            "Voters waited in long lines at polling stations during {thing}.",
            "{name} conceded after the ballot count showed a clear defeat.",
            "Election officials counted mail ballots late into the night.",
            "The challenger campaigned on housing costs and public transit.",
            "{name} predicted a narrow margin in {thing}.",
            "Observers reported no serious problems with voting machines in {thing}.",
            "The candidates debated taxes, schools and crime before {thing}.",
            "{name} thanked volunteers who knocked on {num} thousand doors.",
            "A recount was ordered because the margin was under one percent.",
            "Early voting began two weeks before {thing}.",
            "{name} called the result a mandate for change.",
        ],
        "summary": ["Voters turned out in large numbers for {thing}.", "{name} claimed victory as ballots were counted."],
    },
    "health": {
        "names": ["the hospital", "doctors", "health officials", "the clinic", "nurses"],
        "things": ["the vaccine", "the treatment", "the outbreak", "the new drug", "the screening program"],
        "sentences": [
            "{name} reported that {thing} reduced hospital admissions.",
            "Patients waited weeks for appointments at the crowded clinic.",
            "{name} urged residents to get {thing} before winter.",
            "The clinical trial of {thing} enrolled {num} hundred patients.",
            "Doctors said early diagnosis improves recovery from the disease.",
            "{name} warned that the outbreak was spreading in schools.",
            "Nurses described exhausting shifts in the intensive care ward.",
            "Regulators approved {thing} after reviewing safety data.",
            "{name} expanded the screening program to rural towns.",
            "The hospital hired more nurses to shorten waiting times.",
            "Researchers found {thing} helped patients heal faster.",
            "{name} said the infection rate was finally falling.",
        ],
        "summary": ["{name} said {thing} helped patients recover.", "Hospitals faced pressure from the outbreak."],
    },
    "space": {
        "names": ["the space agency", "astronauts", "mission control", "the rocket company", "engineers"],
        "things": ["the lunar mission", "the rocket launch", "the Mars rover", "the space telescope", "the orbital station"],
        "sentences": [
            "{name} confirmed that {thing} lifted off on schedule.",
            "The rocket carried a crew capsule into orbit around the earth.",
            "{name} said {thing} sent back sharp images of distant galaxies.",
            "Astronauts performed a spacewalk to repair a solar panel.",
            "The rover drilled into martian rock to search for signs of water.",
            "{name} delayed {thing} because of a fuel leak.",
            "The telescope orbits {num} hundred thousand miles from earth.",
            "Engineers tested the heat shield before {thing}.",
            "{name} celebrated a successful landing of {thing}.",
            "The capsule splashed down in the ocean after two weeks in orbit.",
            "Scientists hope {thing} will reveal how planets form.",
            "{name} plans to return astronauts to the moon.",
        ],
        "summary": ["{name} launched {thing} successfully.", "The mission returned images and data from orbit."],
    },
    "cooking": {
        "names": ["the chef", "the baker", "the restaurant", "home cooks", "the food critic"],
        "things": ["the recipe", "the sourdough bread", "the tasting menu", "the pasta dish", "the spice blend"],
        "sentences": [
            "{name} shared {thing} with garlic, butter and fresh herbs.",
            "The dough rests overnight so the bread develops flavor.",
            "{name} roasted the vegetables until they caramelized.",
            "Simmer the sauce for {num} minutes and season with salt.",
            "{name} said {thing} was inspired by a grandmother's kitchen.",
            "The restaurant serves {thing} with a glass of local wine.",
            "Bakers knead the dough and shape loaves by hand.",
            "{name} praised the delicious crust and tender crumb.",
            "Chop the onions finely and fry them in olive oil.",
            "The kitchen sources tomatoes and cheese from nearby farms.",
            "{name} changed {thing} every season to use fresh produce.",
            "Diners lined up early to taste {thing}.",
        ],
        "summary": ["{name} explained how to make {thing}.", "Fresh ingredients gave the dish its flavor."],
    },
    "markets": {
        "names": ["investors", "the central bank", "analysts", "traders", "the company"],
        "things": ["the stock market", "the bond market", "the interest rate decision", "the earnings report", "the share price"],
        "sentences": [
            "{name} sold shares as {thing} fell sharply on inflation fears.",
            "The central bank raised the interest rate by a quarter point.",
            "{name} said {thing} beat expectations for the quarter.",
            "Stocks rallied after the earnings report showed strong profit.",
            "{name} worried that rising debt could slow economic growth.",
            "Bond yields climbed to the highest level in {num} years.",
            "Traders watched {thing} closely for signs of recession.",
            "{name} cut its profit forecast because of weak demand.",
            "The index gained two percent in heavy trading.",
            "{name} expects inflation to ease later this year.",
            "Currency markets reacted to {thing} within minutes.",
            "Share buybacks lifted the share price of large banks.",
        ],
        "summary": ["{name} reacted to {thing}.", "Markets moved on inflation and interest rate news."],
    },
    "wildlife": {
        "names": ["conservationists", "park rangers", "biologists", "the wildlife trust", "volunteers"],
        "things": ["the elephant herd", "the wolf pack", "the sea turtles", "the rare frogs", "the nesting eagles"],
        "sentences": [
            "{name} counted {thing} in the protected reserve this spring.",
            "Poachers threaten the elephants that roam the savanna.",
            "{name} fitted {thing} with tracking collars.",
            "The wetland habitat shrank as farms expanded.",
            "{name} said {thing} recovered after hunting was banned.",
            "Sea turtles returned to nest on the protected beach.",
            "Biologists released {num} captive bred frogs into the forest.",
            "{name} planted native trees to restore the habitat.",
            "The wolves reduced deer numbers and helped the forest recover.",
            "{name} warned that pollution harms {thing}.",
            "Rangers patrol the reserve at night to stop poachers.",
            "The conservation program protects {thing} and their habitat.",
        ],
        "summary": ["{name} worked to protect {thing}.", "Habitat protection helped wildlife recover."],
    },
}

MOODS = [
    "Many people were happy with the progress and hopeful about the future.",
    "Some residents were angry and worried about the damage.",
    "Supporters called it a great success and a wonderful day.",
    "Others described the situation as a terrible crisis.",
    "The mood was calm and peaceful by evening.",
    "Critics blamed officials for the failure and the delay.",
]


def fill(template, rng, topic):
    return template.format(
        name=rng.choice(topic["names"]),
        thing=rng.choice(topic["things"]),
        num=rng.randint(2, 90),
    )


def capitalize(s):
    return s[0].upper() + s[1:]


def make_doc(rng, topic_name, index, with_summary):
    topic = TOPICS[topic_name]
    n = rng.randint(6, 9)
    sentences = [capitalize(fill(t, rng, topic)) for t in rng.sample(topic["sentences"], n)]
    sentences.insert(rng.randint(1, len(sentences)), rng.choice(MOODS))
    doc = {"id": f"{topic_name}-{index:02d}", "title": f"{topic_name.capitalize()} report {index}", "text": " ".join(sentences)}
    if with_summary:
        doc["summary"] = " ".join(capitalize(fill(t, rng, topic)) for t in topic["summary"])
    return doc


def corpus(seed, topic_names, per_topic, with_summary):
    rng = random.Random(seed)
    docs = [make_doc(rng, t, i, with_summary) for t in topic_names for i in range(per_topic)]
    rng.shuffle(docs)
    return docs


def write_jsonl(path, docs):
    with open(path, "w", encoding="utf-8") as f:
        for d in docs:
            f.write(json.dumps(d, ensure_ascii=False) + "\n")


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "samples")
    out.mkdir(parents=True, exist_ok=True)
    write_jsonl(out / "six_docs.jsonl", corpus(6, ["lobbying", "chatbots"], 3, with_summary=False))
    write_jsonl(out / "twenty_docs.jsonl", corpus(20, ["lobbying", "chatbots", "storms", "football"], 5, with_summary=True))
    write_jsonl(out / "hundred_docs.jsonl", corpus(100, list(TOPICS), 10, with_summary=True))


if __name__ == "__main__":
    main()
