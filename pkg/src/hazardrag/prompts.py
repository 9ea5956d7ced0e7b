"""Prompt templates for the agent roles, with strict single-pass rendering."""

from __future__ import annotations

import re
from dataclasses import dataclass


class PromptRenderError(ValueError):
    """Raised when rendering is attempted with an unbound placeholder."""


@dataclass(frozen=True)
class PromptTemplate:
    """A named prompt body with declared {placeholder} names.

    Rendering substitutes declared placeholders in one pass; braces inside
    bindings or elsewhere in the body are left untouched.
    """

    name: str
    body: str
    placeholders: tuple[str, ...]


def render_prompt(template: PromptTemplate, bindings: dict) -> str:
    missing = [p for p in template.placeholders if p not in bindings]
    if missing:
        raise PromptRenderError(f"{missing[0]} unbound")
    pattern = re.compile(
        "|".join(r"\{" + re.escape(p) + r"\}" for p in template.placeholders)
    )
    return pattern.sub(lambda m: str(bindings[m.group(0)[1:-1]]), template.body)


ROUTER_TEMPLATE = PromptTemplate(
    name="router",
    placeholders=("question",),
    body="""Act as a routing expert agent. Classify a user's question into probabilities over
natural hazard categories. These probabilities determine which hazard-specific
RAG agent(s) should be activated.
Question: {question}

Rules:
1) Output only a valid JSON object exactly matching the output example below.
2) Use the following hazard categories as keys.
3) Assign a normalized probability (0-1) to each category so that the total sums to 1.
4) Categories with probability >= 0.2 indicate active agents.
5) Do not include explanations, text descriptions, or additional fields.

Output Example:
{
  "Wildfire": 0.01,
  "Storm": 0.10,
  "Landslide": 0.05,
  "Hurricane": 0.61,
  "Flood": 0.21,
  "Earthquake": 0.01,
  "Tsunami": 0.01
}
""",
)

EVALUATOR_TEMPLATE = PromptTemplate(
    name="evaluator",
    placeholders=("question", "evidence"),
    body="""You are an expert in hazards and resilience. Decide whether the related excerpts
contain sufficient information to answer the question or evaluate the statement.
Question: {question}
Related Evidence: {evidence}

Rules:
1) Judge the factual sufficiency of the excerpts with respect to the question.
2) Do not infer or assume information beyond what is provided.
3) Output only a single value:
   - '1' if the evidence provide enough information.
   - '0' if the evidence are insufficient.
""",
)

REWRITER_TEMPLATE = PromptTemplate(
    name="rewriter",
    placeholders=("question", "evidence"),
    body="""You are an expert in hazards and resilience with strong knowledge of information
retrieval. Rewrite the given question to improve retrieval accuracy.
Original Question: {question}
Retrieved Insufficient Information: {evidence}

Rules:
1) Replace vague expressions with precise, domain-relevant language.
2) If the question is too broad, narrow it to highlight key entities or events.
3) If the question is too narrow, generalize slightly for broader information.
4) Maintain the original intent and semantics of the question.
5) Output only the rewritten question, no explanations or commentary.
""",
)

ANSWER_WRITER_TEMPLATE = PromptTemplate(
    name="answer_writer",
    placeholders=("question", "evidence"),
    body="""You are an expert in hazards and resilience. Determine the correct answer based
on the retrieved evidence provided by reports or online resources.
Question: {question}
Trustworthy Evidence (if applicable): {evidence}

Rules:
1) Judge strictly on the factual information in the evidence.
2) Do not infer or assume information beyond what is given.
3) Output format:
   - If the question is True/False, answer with one word: true or false.
   - If the question is Multiple Choice, answer with one letter: A, B, C, or D.
4) Do not include punctuation, explanations, or additional text.
""",
)

QA_GENERATOR_TEMPLATE = PromptTemplate(
    name="qa_generator",
    placeholders=("disaster_type", "year", "location", "paragraph"),
    body="""Act as a hazard expert, generate an exam-ready QA item grounded in the paragraph.
Context: The {disaster_type} occurred in {year} at {location}.
A paragraph from the reconnaissance report describes the hazard: {paragraph}.

Rules:
1) Each question must be strictly grounded in factual evidence from the paragraph
   and reflect hazard-specific or multi-hazard knowledge.
2) The question statement must always be written as a general exam-style question,
   without mentioning the paragraph or the source text.
3) If the text is unsuitable (e.g., TOC, Acknowledgements, References):
   - Return { } only.
4) Otherwise, create one QA item following the JSON format:
   - True/False -> {"statement": <string>, "answer": "true"|"false"}
   - MC (A-D, one correct) -> {"question": <string>,
                               "options": ["A. ...","B. ...","C. ...","D. ..."],
                               "correct": "A"|"B"|"C"|"D"}
5) Categorize the question under the categories: Hazard Characteristics, Analysis
   Approach, Impacts and Damage, Response and Recovery, Invalid
6) No explanations or extra text.
""",
)

PROPOSITION_TEMPLATE = PromptTemplate(
    name="proposition",
    placeholders=("disaster_type", "year", "location", "paragraph"),
    body="""Act as a hazard domain expert. Decompose the given paragraph into clear,
self-contained propositions that can be understood independently of the source text.
Context: The {disaster_type} occurred in {year} at {location}.
A paragraph from the reconnaissance report describes the hazard: {paragraph}.

Rules:
1) Split complex or compound sentences into minimal, simple statements.
2) Keep original wording whenever possible; ensure each statement stand alone.
3) Replace pronouns (it, they, this, that) with full entity names.
4) Preserve explicit details such as dates, times (timezone/Z), locations, agencies.
5) Output the results in JSON format as a list of propositions:
   {"Prop": ["<proposition_1>", "<proposition_2>", ...]}
""",
)

AGENTIC_GROUP_TEMPLATE = PromptTemplate(
    name="agentic_group",
    placeholders=("list_of_prop",),
    body="""Act as a hazard domain expert. Given a list of factual propositions, group
semantically related ones and generate concise summaries to form aggregated,
context-aware chunks optimized for RAG.
Context: The propositions are provided as: {list_of_prop}.

Rules:
1) Process propositions sequentially in the given order.
2) Group consecutive propositions that are semantically related into one chunk.
   When a proposition is unrelated, finalize the chunk and start a new one.
3) Each chunk must contain no more than ten propositions.
4) For each chunk, write a short summary that captures the shared meaning.
   - Summaries must be concise and precise.
   - Preserve hazard or event details (dates, units, measurements).
   - Use consistent terminology across summaries.
5) Output the results in JSON format:
   {
     "Chunks": [
       {
         "Summary": "<string>",
         "List of Propositions": ["<prop1>", "<prop2>", ...]
       }
     ]
   }
6) Do not alter or invent facts; keep all proposition text unchanged.
7) Return only the JSON object, no extra explanations or commentary.
""",
)

TEMPLATES: dict[str, PromptTemplate] = {
    t.name: t
    for t in (
        ROUTER_TEMPLATE,
        EVALUATOR_TEMPLATE,
        REWRITER_TEMPLATE,
        ANSWER_WRITER_TEMPLATE,
        QA_GENERATOR_TEMPLATE,
        PROPOSITION_TEMPLATE,
        AGENTIC_GROUP_TEMPLATE,
    )
}


def get_template(name: str) -> PromptTemplate:
    try:
        return TEMPLATES[name]
    except KeyError:
        raise KeyError(f"unknown prompt template: {name!r}") from None
