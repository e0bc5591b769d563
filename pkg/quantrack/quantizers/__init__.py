"""Follower and leader quantizers with integer codewords."""

from .quantizer import Quantizer, QuantizerOutput, ediv, emul, encode_codewords, decode_codewords
from .follower import FollowerQuantizer, FollowerQuantizerSpec, q_follower, q_vec_follower
from .leader import LeaderQuantizer, LeaderQuantizerSpec, q_leader, q_vec_leader

__all__ = [
    'Quantizer', 'QuantizerOutput', 'ediv', 'emul', 'encode_codewords', 'decode_codewords',
    'FollowerQuantizer', 'FollowerQuantizerSpec', 'q_follower', 'q_vec_follower',
    'LeaderQuantizer', 'LeaderQuantizerSpec', 'q_leader', 'q_vec_leader',
]
