from .assembler import AssemblyError, AssemblyProgram, assemble, disassemble, format_instruction
from .binfmt import BinaryFormatError, pack_program, unpack_program
from .encoding import EncodingError, Illegal, Instruction, decode, encode, is_canonical, is_legal
from .opcodes import EXTENDED, NEUROMORPHIC, Opcode, register_name

__all__ = [
    "AssemblyError",
    "AssemblyProgram",
    "BinaryFormatError",
    "EXTENDED",
    "EncodingError",
    "Illegal",
    "Instruction",
    "NEUROMORPHIC",
    "Opcode",
    "assemble",
    "decode",
    "disassemble",
    "encode",
    "format_instruction",
    "is_canonical",
    "is_legal",
    "pack_program",
    "register_name",
    "unpack_program",
]
