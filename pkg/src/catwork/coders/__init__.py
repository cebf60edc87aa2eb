"""Codings of c.e. sets and limitwise monotonic functions into structures."""

from catwork.coders.boxes import (
    SPINE,
    BoxPair,
    ThresholdProfile,
    achievable_dominators,
    box_kind,
    boxes_canonical_iso,
    build_boxes,
    extract_dominator,
    iso_with_modulus,
    threshold_profile,
)
from catwork.coders.composite import (
    R_PART,
    CompositeStructure,
    SOmega,
    build_composite,
    build_s_omega,
    composite_iso,
    end_to_end,
    match_s_omega,
    restrict_to_core,
)
from catwork.coders.primality import PrimalityReport, primality_report
from catwork.coders.warmup import (
    WarmupPair,
    achievable_a0_images,
    build_warmup,
    decode_from_warmup_iso,
    sort_tag,
    stage_tag,
    warmup_canonical_iso,
    warmup_iso_with_D,
)

__all__ = [
    "SPINE", "R_PART", "BoxPair", "CompositeStructure", "PrimalityReport", "SOmega",
    "ThresholdProfile", "WarmupPair", "achievable_a0_images", "achievable_dominators", "box_kind",
    "boxes_canonical_iso", "build_boxes", "build_composite", "build_s_omega",
    "build_warmup", "composite_iso", "decode_from_warmup_iso", "end_to_end",
    "extract_dominator", "iso_with_modulus", "match_s_omega", "primality_report",
    "restrict_to_core", "sort_tag", "stage_tag", "threshold_profile",
    "warmup_canonical_iso", "warmup_iso_with_D",
]
