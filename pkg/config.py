"""
설정 파일
ILA 타입 검사기, 인터프리터, 실험 도구의 기본 설정을 관리합니다.
"""
import os
from dotenv import load_dotenv

# .env 파일 로드
load_dotenv()

# 출력 설정
ILA_COLOR = os.getenv('ILA_COLOR', '1')  # 0/false/off/never 이면 ANSI 색상 비활성화
COLOR_ENABLED = ILA_COLOR.strip().lower() not in ('0', 'false', 'off', 'never', 'no')
LOG_LEVEL = os.getenv('ILA_LOG_LEVEL', 'WARNING').upper()  # 모듈 로거 수준 (DEBUG 이면 추론/검사 과정 출력)

# 하강(lowering) 설정
UNROLL_BUDGET = int(os.getenv('ILA_UNROLL_BUDGET', '1000000'))  # 루프 전개 후 최대 코어 문장 수

# 난수 및 시행 횟수
DEFAULT_SEED = int(os.getenv('ILA_DEFAULT_SEED', '0'))  # 기본 시드
DEFAULT_TRIALS = int(os.getenv('ILA_TRIALS', '20'))  # CLI 기본 시행 횟수
TIMING_RUNS = int(os.getenv('ILA_TIMING_RUNS', '5'))  # 시간 측정 반복 횟수 (중앙값 사용)

# 프리셋 경로
PRESET_DIR = os.getenv('ILA_PRESET_DIR', os.path.join(os.path.dirname(os.path.abspath(__file__)), 'presets'))
CIRCUIT_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'circuits')

# 토이 RLWE 스킴 설정 (보안성 없음)
ERROR_WIDTH = 1  # 중심 이항분포 폭 η
RELIN_BASE_BITS = 16  # 재선형화 가젯 분해 밑 (2^w)

# 잡음 추정기 기본값
DEFAULT_ESTIMATOR = 'worst_case'  # 기본 추정기 이름

# TFHE 시뮬레이터 설정
TFHE_Q = 2 ** 32  # TFHE 암호문 모듈러스
TFHE_FRESH_NOISE = 2 ** 10  # 새 암호문 잡음 상한 ε_fresh

# 깊이 탐사 설정
DEPTH_PROBE_MAX = 40  # 탐사할 최대 곱셈 깊이
DEPTH_PROBE_TRIALS = 3  # 깊이별 동적 시행 횟수
DEPTH_PROBE_BITS = [20, 30, 40, 50, 60]  # 기본 q 비트 스윕
TFHE_PROBE_BITS = list(range(2, 13))  # t = 2^p 의 p 스윕
