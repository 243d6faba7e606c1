"""Privacy-utility tradeoffs for finite discrete data models."""
from .probability import (Alphabet, Channel, JointPmf, Pmf, Tolerances, TOL, conditional_entropy,
                          entropy, load_channel, load_joint, marginal, mutual_information, push_mechanism)
from .measures import AdjacencyRelation, DistortionMeasure, PrivacyMeasure, distortion, leakage
from .solver import Scenario, SolverOptions, TradeoffPoint, brute_force_oracle, solve_point, tradeoff_curve
from .common_info import common_part, gk_common_information, common_part_witness, matched_release_pair
from .symmetric_pair import SPParams, closed_form, sp_joint
from .estimator import CommonPartEncoder, TradeoffMechanism

__version__ = "0.1.0"
