"""storyforge: branching social-narrative storybooks for shared parent-child reading.

The package is organized by concern:

- ``storyforge.story``: the story document model, structural validator,
  path enumeration, and the on-disk document format.
- ``storyforge.readability``: grade-level scoring and vocabulary flagging
  used to keep generated text readable.
- ``storyforge.pipeline``: the staged generation pipeline over pluggable
  text/image/embedding providers, including a deterministic mock suite.
- ``storyforge.service``: persistence, reading sessions with rewards, and
  the HTTP API.
- ``storyforge.insights``: offline reports and corpus validation tools.
"""

__version__ = "0.1.0"
