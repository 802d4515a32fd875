"""
gameproof - games, proofs and machines for the CL12 sequent calculus

Parse sequents of Computability Logic, play their games, search for and check CL12
proofs, run the strategies proofs encode, compose solutions along a proof, and refute
machines on unprovable sequents.
"""

__version__ = "0.1.0"
