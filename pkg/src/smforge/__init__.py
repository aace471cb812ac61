"""smforge: symbolic workbench for noisy S-machines and their groups."""

from smforge.words import (
    Alphabet,
    Word,
    cyclic_reduce,
    express_in_basis,
    expression_word,
    free_reduce,
    is_member,
    relabel,
    substitute,
    validate_basis,
)
from smforge.smachine import (
    AdmissibleWord,
    Computation,
    GeneralizedRule,
    Hardware,
    Machine,
    MachineError,
    NoiseDecl,
    Part,
    RulePart,
    SectorRule,
    apply_rule,
    invert_rule,
    machine_from_text,
    machine_to_text,
    reduce_history,
    semi_apply,
    validate_noisy,
)
from smforge.machines import (
    NoiseScheme,
    build_m1,
    compress,
    compressed_semi,
    decode_noise,
    delta,
    epsilon,
    lambda1_accept,
    marker_split,
    noise_word,
    shift,
)
from smforge.towers import (
    SigmaSpec,
    associated_pair,
    component,
    compose,
    cyclify,
    pad,
    parallelize,
    reflect,
)
from smforge.mainmachine import (
    DivisibleRecognizer,
    MainMachine,
    Params,
    RecognizerPlugin,
    RejectingRecognizer,
    accepting_run,
    build_main,
    history_ell,
    lambda_accept,
    main_time_bound,
    paper_violations,
    validate_plugin,
)
from smforge.embedding import (
    EmbeddingPipeline,
    ExpandedPresentation,
    RelatorOracle,
    StandardTrick,
    build_pipeline,
    builtin_oracle,
    expand_C,
    generator_images,
    lambda_oracle,
    standard_trick,
    wp_RC,
)

__all__ = [
    "Alphabet",
    "Word",
    "cyclic_reduce",
    "express_in_basis",
    "expression_word",
    "free_reduce",
    "is_member",
    "relabel",
    "substitute",
    "validate_basis",
    "AdmissibleWord",
    "Computation",
    "GeneralizedRule",
    "Hardware",
    "Machine",
    "MachineError",
    "NoiseDecl",
    "Part",
    "RulePart",
    "SectorRule",
    "apply_rule",
    "invert_rule",
    "machine_from_text",
    "machine_to_text",
    "reduce_history",
    "semi_apply",
    "validate_noisy",
    "NoiseScheme",
    "build_m1",
    "compress",
    "compressed_semi",
    "decode_noise",
    "delta",
    "epsilon",
    "lambda1_accept",
    "marker_split",
    "noise_word",
    "shift",
    "SigmaSpec",
    "associated_pair",
    "component",
    "compose",
    "cyclify",
    "pad",
    "parallelize",
    "reflect",
    "DivisibleRecognizer",
    "MainMachine",
    "Params",
    "RecognizerPlugin",
    "RejectingRecognizer",
    "accepting_run",
    "build_main",
    "history_ell",
    "lambda_accept",
    "main_time_bound",
    "paper_violations",
    "validate_plugin",
    "EmbeddingPipeline",
    "ExpandedPresentation",
    "RelatorOracle",
    "StandardTrick",
    "build_pipeline",
    "builtin_oracle",
    "expand_C",
    "generator_images",
    "lambda_oracle",
    "standard_trick",
    "wp_RC",
]

__version__ = "0.1.0"
