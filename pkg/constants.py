"""Workbench constants and configuration values."""

# Type systems
ULL = "ull"     # two-sided, unrestricted + linear regions
ULLM = "ullm"   # the starred rules of ULL plus the two side moves
ILL = "ill"     # intuitionistic, exactly one name on the right
CLL = "cll"     # one-sided classical
SYSTEMS = (ULL, ULLM, ILL, CLL)

# Serialization
DERIVATION_FORMAT = "deriv-v1"
TYPE_SUFFIX = ".sty"
PROCESS_SUFFIX = ".spi"
DERIVATION_SUFFIX = ".deriv.json"

# Rule names of the two-sided system, in the order proof search tries them
ULL_AXIOMS = ("idR", "idL", "idRL", "idRR", "1R", "botL")
ULL_LOGICAL = (
    "1L", "botR",
    "tensorR", "tensorL", "parR", "parL", "lolliR", "lolliL",
    "plusR", "plusL", "withR", "withL",
    "copyR", "copyL", "!R", "!L", "?R", "?L",
)
ULL_CUTS = ("cutRL", "cutLR", "cutRR", "cutLL", "cut!R", "cut!L", "cut?R", "cut?L")

# Rules that survive in the move calculus
STAR_RULES = frozenset({
    "idR", "1R", "1L", "tensorR", "tensorL", "lolliR", "lolliL",
    "plusR", "plusL", "withR", "withL", "copyL", "!R", "!L",
    "cutRL", "cutLR", "cut!R", "cut!L",
})
MOVE_LEFT = "moveL"    # right-hand name moves left at the dual type
MOVE_RIGHT = "moveR"   # left-hand name moves right at the dual type
MOVES = (MOVE_LEFT, MOVE_RIGHT)

# Rules that rename an unrestricted name to a fresh linear one without a prefix
SILENT_RULES = frozenset({"!L", "?R"})

ILL_RULES = (
    "id", "1R", "1L", "tensorR", "tensorL", "lolliR", "lolliL",
    "plusR", "plusL", "withR", "withL", "copy", "!R", "!L",
    "cutRL", "cutLR", "cut!R", "cut!L",
)
# Intuitionistic rules named differently from their two-sided counterparts
ILL_TO_ULL = {"id": "idR", "copy": "copyL"}

CLL_RULES = (
    "id", "bot", "1", "tensor", "par", "plus", "with",
    "copy", "?", "!", "cut", "cut?R", "cut?L",
)

MIX_RULES = ("mix", "empty")
CYCLE_RULES = ("cycleRL", "cycleLR", "cycleRR", "cycleLL")

# Reduction labels
BETA_RULES = ("betaId", "betaClose", "betaSend", "betaSel", "betaServ", "betaWeaken")
KAPPA_RULES = (
    "kappaClose", "kappaSendR", "kappaSendL", "kappaRecv", "kappaSel", "kappaBra",
    "kappaCopy",
)
CONGRUENCE_AXIOMS = ("cutSymm", "cutAssocL", "cutAssocR")

# Budgets
DEFAULT_MAX_DEPTH = 64
DEFAULT_MAX_BACKTRACKS = 200000
FUEL_FACTOR = 4              # run_closed fuel = factor * process size
CONGRUENCE_SEARCH_LIMIT = 20000
ORACLE_HARD_CAP = 200000

# Generator defaults
GEN_POOL_SIZE = 6
GEN_ROUNDS_PER_DEPTH = 8
GEN_CUT_ATTEMPTS = 32       # reseeds before gen_cut_derivation settles for a closed program
GEN_LABELS = ("l", "r")
