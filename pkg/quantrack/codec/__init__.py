"""Synchronized encoder/decoder pairs for follower and leader states."""

from .codec import Codec
from .follower import (
    FollowerCodecState, FollowerStep, FollowerEncoder, FollowerDecoder,
    follower_codec_step, theta_step,
)
from .leader import (
    LeaderCodecState, LeaderStep, LeaderEncoder, LeaderDecoder,
    leader_codec_step, omega_step, reinflate,
)

__all__ = [
    'Codec',
    'FollowerCodecState', 'FollowerStep', 'FollowerEncoder', 'FollowerDecoder',
    'follower_codec_step', 'theta_step',
    'LeaderCodecState', 'LeaderStep', 'LeaderEncoder', 'LeaderDecoder',
    'leader_codec_step', 'omega_step', 'reinflate',
]
