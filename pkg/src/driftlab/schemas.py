"""JSON schemas for the report artifacts written by the CLI."""

_num = {"type": "number"}
_nullable_num = {"type": ["number", "null"]}

SHIFT_REPORT = {
    "type": "object",
    "required": ["schema_version", "kind", "scores"],
    "properties": {
        "schema_version": {"const": 1},
        "kind": {"const": "shift"},
        "scores": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["word", "per_step", "cumulative"],
                "properties": {
                    "word": {"type": "string"},
                    "per_step": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}},
                    "cumulative": {"type": "number", "minimum": 0},
                },
            },
        },
    },
}

NEIGHBOR_REPORT = {
    "type": "object",
    "required": ["schema_version", "kind", "traces"],
    "properties": {
        "schema_version": {"const": 1},
        "kind": {"const": "neighbors"},
        "traces": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["word", "D_c", "periods"],
                "properties": {
                    "word": {"type": "string"},
                    "D_c": _num,
                    "periods": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["index", "neighbors"],
                            "properties": {
                                "index": {"type": "integer"},
                                "neighbors": {
                                    "type": "array",
                                    "items": {
                                        "type": "object",
                                        "required": ["key", "sim"],
                                        "properties": {"key": {"type": "string"}, "sim": _num},
                                    },
                                },
                            },
                        },
                    },
                },
            },
        },
    },
}

EVAL_SIM_REPORT = {
    "type": "object",
    "required": ["schema_version", "kind", "results"],
    "properties": {
        "schema_version": {"const": 1},
        "kind": {"const": "eval-sim"},
        "results": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["period", "rho", "p", "n_used", "n_skipped"],
            },
        },
    },
}

EVAL_SYN_REPORT = {
    "type": "object",
    "required": ["schema_version", "kind", "results"],
    "properties": {
        "schema_version": {"const": 1},
        "kind": {"const": "eval-syn"},
        "results": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["period", "pos", "mean_spread", "n_used", "n_skipped"],
            },
        },
    },
}

SENTI_MATRIX_REPORT = {
    "type": "object",
    "required": ["schema_version", "kind", "periods", "values", "p_values", "baselines", "mode"],
    "properties": {
        "schema_version": {"const": 1},
        "kind": {"const": "senti-matrix"},
        "periods": {"type": "array", "items": {"type": "integer"}},
        "values": {"type": "array", "items": {"type": "array", "items": _num}},
        "p_values": {"type": ["array", "null"], "items": {"type": "array", "items": _nullable_num}},
        "baselines": {"type": "array", "items": _num},
        "mode": {"enum": ["hard", "expected"]},
    },
}

SENTI_SHARE_REPORT = {
    "type": "object",
    "required": ["schema_version", "kind", "shares"],
    "properties": {
        "schema_version": {"const": 1},
        "kind": {"const": "senti-share"},
        "shares": {"type": "array", "items": {"type": "object", "required": ["period", "positive_share"]}},
    },
}

BY_KIND = {
    "shift": SHIFT_REPORT,
    "neighbors": NEIGHBOR_REPORT,
    "eval-sim": EVAL_SIM_REPORT,
    "eval-syn": EVAL_SYN_REPORT,
    "senti-matrix": SENTI_MATRIX_REPORT,
    "senti-share": SENTI_SHARE_REPORT,
}
