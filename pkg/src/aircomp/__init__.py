"""Coded digital over-the-air computation over a pre-compensated MAC."""

from .field import FieldElement, PrimeField, smallest_valid_q
from .ldpc import Encoder, ParityCheckMatrix, encode, load_alist, random_code, syndrome
from .bp import BatchDecoder, DecoderState, box_plus, decode, permute
from .lattice import LatticeConfig, demap_hard, map_point, mod1
from .channel import ChannelParams, sigma_from_snr, transmit
from .demod import codeword_llrs, gamma_profile, symbol_llrs
from .sim import SimConfig, complexity_table, run_sweep, run_trial

__version__ = "0.1.0"
