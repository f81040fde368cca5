# Copyright 2026 The vig-curate Authors
# SPDX-License-Identifier: Apache-2.0
"""Visual information gain scoring, selection and reports."""

import json

from ._core import *  # noqa: F401,F403
from ._core import VigError, __version__, normalize_record, synthetic_score_record


def load_record(line):
    """Parse and validate one corpus line into a dict, with VIG fields when scorable."""
    return json.loads(normalize_record(line))


def synthetic_score(world, record):
    """Score a record dict with a synthetic world given as a dict or JSON string."""
    world_json = world if isinstance(world, str) else json.dumps(world)
    return json.loads(synthetic_score_record(world_json, json.dumps(record)))
