"""voxslice: block-compressed color volumes with interactive oblique slicing."""

from .annotate import (HighlightParams, LabelAnnotation, LabelStats,
                       PickResult, Ray, analyze_slice_labels, apply_highlight,
                       pick_plane, place_edge_labels, select_key_labels)
from .codec import (ColorKey, CompressedSlice, bc1_decode_block,
                    bc1_encode_block, compress_volume, decode_texel,
                    downsample_slice, expand_565_to_888,
                    map_colors_to_labels, quantize_888_to_565)
from .command import (CommandAst, ParseError, SessionState, SynonymTable,
                      apply_command, default_plane, format_command,
                      parse_command, resolve_structure)
from .phantom import Ellipsoid, GradientField, PhantomSpec, generate_phantom
from .slicer import (BoxSlicer, FrameBudgetController, PlaneGeometry,
                     PlaneSlicer, SliceImage, box_face_planes,
                     controller_update, plane_pixel_to_world,
                     render_box_faces, render_plane_slice, save_slice_png,
                     save_slice_ppm)
from .vhs1 import FormatError, read_vhs1, write_vhs1
from .volume import (ColorVolume, DomainError, LabelVolume, PaletteEntry,
                     VolumeMeta, sample_label_nearest, sample_trilinear,
                     voxel_to_world, world_to_continuous_index)

__version__ = "0.1.0"
