"""PCB renewal planning: board diffing, epoxy deposition / re-engraving
fabrication profiles, and renew-vs-new sustainability analysis."""

__version__ = "0.1.0"
