from .costs import decode_table, instruction_cycles, program_cycle_cost
from .kernel import IMPLEMENTATION
from .neuron_core import (
    CoreConfig,
    CoreFault,
    NeuronCore,
    NeuronRecord,
    default_exp_lut,
    execute_instruction,
    generate_spike,
    params_array,
)

__all__ = [
    "IMPLEMENTATION",
    "CoreConfig",
    "CoreFault",
    "NeuronCore",
    "NeuronRecord",
    "decode_table",
    "default_exp_lut",
    "execute_instruction",
    "generate_spike",
    "instruction_cycles",
    "params_array",
    "program_cycle_cost",
]
