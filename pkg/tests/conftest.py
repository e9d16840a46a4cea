"""
공용 테스트 픽스처
작은 BGV/BFV/TFHE 모델과 키, 코퍼스 회로
"""
import os
import sys

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

import numpy as np
import pytest

import config
from schemes import build_model, load_scheme_config

BGV_SMALL = {'scheme': 'bgv', 't': 16, 'd': 8, 'modulus_bits': [110, 90, 70, 50, 30]}
BFV_SMALL = {'scheme': 'bfv', 't': 16, 'd': 8, 'modulus_bits': [60]}
TFHE_SMALL = {'scheme': 'tfhe', 't': 16}


def preset_path(name: str) -> str:
    return os.path.join(config.PRESET_DIR, f"{name}.json")


def circuit_path(name: str) -> str:
    return os.path.join(config.CIRCUIT_DIR, f"{name}.ila")


def preset(name: str) -> dict:
    return load_scheme_config(preset_path(name))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def bgv_cfg():
    return dict(BGV_SMALL)


@pytest.fixture
def bgv_model():
    return build_model(BGV_SMALL)


@pytest.fixture
def bgv_keyed():
    return build_model(BGV_SMALL, seed=7)


@pytest.fixture
def bfv_model():
    return build_model(BFV_SMALL)


@pytest.fixture
def bfv_keyed():
    return build_model(BFV_SMALL, seed=7)


@pytest.fixture
def tfhe_model():
    return build_model(TFHE_SMALL)


@pytest.fixture
def tfhe_keyed():
    return build_model(TFHE_SMALL, seed=7)
