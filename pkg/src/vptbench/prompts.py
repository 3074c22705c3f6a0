"""Prompt strings and tool schemas presented to subjects."""

import json

GENERAL_SYSTEM_PROMPT = (
    "You are a helpful assistant attempting to submit the correct answer. You have "
    "several functions available to help with finding the answer. Each message may "
    "perform one function call. You will see the result of the function right after "
    "sending the message. If you need to perform multiple actions, you can always "
    "send more messages with subsequent function calls. Do some reasoning before "
    "your actions, describing what function calls you are going to use and how they "
    "fit into your plan. When you have completed the task and have an answer, call "
    "the submit() function to report it."
)

RFT_SYSTEM_PROMPT = (
    "You are participating in a visual perspective-taking experiment. You will be "
    "shown images containing a person (or arrow) and possibly a number or symbol on "
    "the ground nearby. Your task is to answer questions about what you can see in "
    "the image, considering both your own perspective as the viewer and the "
    "perspective of the person/figure in the image. Pay careful attention to: the "
    "orientation and position of figures in the image; whether numbers appear as "
    '"6" or "9" depending on viewing angle; spatial relationships (left/right, '
    "front/behind) from different perspectives; what is visible vs. hidden from "
    "different viewpoints. Answer exactly as requested in the prompt."
)

DIRECTOR_SYSTEM_PROMPT = (
    "There is a shelf in front of you with a grid of items on it. The user is "
    "standing on the opposite side of the shelves and is asking you to pick up a "
    "specific item for them that they can see. Some of the cells in the grid are "
    "blocked from the user's view, hiding anything that might be there, indicated "
    "by the dark background in the cell. You will receive an image of the grid from "
    "your point of view. Submit your answer in the form <column><row>, for example "
    "'C2'."
)

_ONE_SYMBOL = (
    "There is a person standing in the centre of the image, and a number or letter "
    "on the floor nearby."
)

RFT_CONTEXT = {
    "CONTROL_1": _ONE_SYMBOL,
    "CONTROL_2": (
        "There is a person standing in the centre of the image. There are coloured "
        "walls along the border."
    ),
    "TEST_1": _ONE_SYMBOL,
    "TEST_2": _ONE_SYMBOL,
    "TEST_3": (
        "There is a person standing in the centre of the image, and 2 numbers or "
        "letters on the floor nearby."
    ),
}

RFT_QUESTION = {
    ("CONTROL_1", "VISUAL"): (
        "What number or letter can you see in the image? "
        "Respond with a single number or letter:"
    ),
    ("CONTROL_1", "SPATIAL"): (
        "Is the number or letter on the left or right side of the image? "
        "Respond with a single word: LEFT or RIGHT"
    ),
    ("CONTROL_2", "VISUAL"): (
        "What colour is the wall directly in front of the person? "
        "Respond with a single word: RED, GREEN, BLUE or BLACK"
    ),
    ("CONTROL_2", "SPATIAL"): (
        "Which side of the image is directly in front of the person? "
        "Respond with a single word: LEFT, RIGHT, TOP or BOTTOM"
    ),
    ("TEST_1", "VISUAL"): (
        "Can the person see the number or letter? "
        "Respond with either: CAN SEE or CANNOT SEE"
    ),
    ("TEST_1", "SPATIAL"): (
        "Is the number or letter in front of or behind the person? "
        "Respond with a single word: FRONT or BEHIND"
    ),
    ("TEST_2", "VISUAL"): (
        "What number or letter can the person see? "
        "Respond with a single number or letter:"
    ),
    ("TEST_2", "SPATIAL"): (
        "Is the number or letter on the person's left or right? "
        "Respond with a single word: LEFT or RIGHT"
    ),
    ("TEST_3", "VISUOSPATIAL"): (
        "What number or letter can the person see on their {side} side? "
        "Respond with a single number or letter:"
    ),
}

SUBMIT_TOOL_JSON = """{
  "name": "submit",
  "description": "Submit an answer for evaluation.",
  "parameters": {
    "type": "object",
    "properties": {
      "answer": {
        "type": "string",
        "description": "Submitted answer"
      }
    },
    "required": ["answer"],
    "additionalProperties": false
  }
}"""

THINK_TOOL_JSON = """{
  "name": "think",
  "description": "Use this tool to stop, think and reason about the task at hand. Particularly useful to build plans and reflect on them prior to executing actions.",
  "parameters": {
    "type": "object",
    "properties": {
      "thoughts": {
        "type": "string",
        "description": "The thoughts or reasoning process of the agent."
      }
    },
    "required": ["thoughts"],
    "additionalProperties": false
  }
}"""

SUBMIT_TOOL = json.loads(SUBMIT_TOOL_JSON)
THINK_TOOL = json.loads(THINK_TOOL_JSON)
TOOLS = (THINK_TOOL, SUBMIT_TOOL)

THINK_ACK = "Thoughts recorded."
NUDGE = "Please proceed to the next step using your best judgement. When you have an answer, call the submit() function to report it."
