"""Scene construction, configuration, and the simulate-shade-render loop.

Scenes are described by a line-oriented key = value config split into
sections (see the README for the grammar; units are spelled out in key
suffixes).  Procedural generators build flags (planar patch grids) and
sand blocks (lattice fills with surface classification); shipped presets
carry the reference parameter sets as config files.
"""

import configparser
import dataclasses
import io
import os
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import mpm, render, surface, wind
from .errors import BlowUpError, ConfigError, DegenerateMatrixError
from .materials import DRUCKER_PRAGER, FIXED_COROTATED, MaterialParams
from .mpm import Grid, Particles, StepConfig
from .render import Camera, LightConfig
from .wind import AeroCoefficients, FlowField

FLAG = "flag"
SAND_BLOCK = "sand_block"

_CORNERS = {"bl": (0, 0), "br": (1, 0), "tl": (0, 1), "tr": (1, 1)}


@dataclass
class EditOverrides:
    """Config-level scene edits applied after construction.

    ``color`` replaces every patch's intrinsic color; material fields
    replace the corresponding MaterialParams entries (mass is rebuilt when
    density changes).
    """

    color: np.ndarray = None
    model: str = None
    young_modulus: float = None
    poisson_ratio: float = None
    density: float = None
    friction_angle_deg: float = None

    def is_empty(self):
        return all(
            getattr(self, f.name) is None for f in dataclasses.fields(self)
        )


@dataclass
class SceneConfig:
    """Full description of one simulation run."""

    kind: str = FLAG
    nx: int = 20
    ny: int = 30
    nz: int = 8
    width: float = 1.0
    height: float = 1.5
    spacing: float = 0.04
    thickness: float = 0.005
    scene_origin: np.ndarray = field(default_factory=lambda: np.zeros(3))
    pin: str = "none"
    color: np.ndarray = field(default_factory=lambda: np.ones(3))
    opacity_threshold: float = 0.1
    material: MaterialParams = field(default_factory=MaterialParams)
    coeffs: AeroCoefficients = field(default_factory=AeroCoefficients)
    aero_surface_only: bool = True
    aero_use_world_area: bool = False
    aero_cos_attenuation: bool = False
    flow: FlowField = field(default_factory=FlowField)
    flow_late_base: np.ndarray = None
    flow_switch_frame: int = 0
    grid_dx: float = 0.05
    grid_dims: tuple = None
    grid_origin: np.ndarray = None
    grid_boundary_margin: int = 2
    pin_node_radius: float = None
    step: StepConfig = field(default_factory=StepConfig)
    camera: Camera = None
    light: LightConfig = field(default_factory=LightConfig)
    shading_mode: str = render.DIFFUSE
    frames: int = 250
    seed: int = 0
    out_dir: str = "out"
    dump_particles: bool = False
    dump_patches: bool = False
    edit: EditOverrides = None

    def __post_init__(self):
        if self.kind not in (FLAG, SAND_BLOCK):
            raise ConfigError(f"unknown scene kind {self.kind!r}")
        if self.frames <= 0:
            raise ConfigError("frame count must be positive")
        if self.camera is None:
            center = self.scene_origin + np.array(
                [self.width / 2.0, self.height / 2.0, 0.0]
            )
            self.camera = Camera(position=center + [0.0, 0.0, 3.0], look_at=center)
        self.scene_origin = np.asarray(self.scene_origin, dtype=float)
        self.color = np.asarray(self.color, dtype=float)


@dataclass
class Scene:
    """Built scene state handed to the frame loop."""

    config: SceneConfig
    patches: surface.Patches
    particles: Particles
    grid: Grid
    material: MaterialParams


def build_flag(nx, ny, width, height, thickness, material, pin="none", color=(1.0, 1.0, 1.0), origin=(0.0, 0.0, 0.0)):
    """Planar nx-by-ny patch grid in the xy plane with normals along +z.

    Patch scalings are half the grid spacing in-plane and ``thickness``
    along the normal; each patch owns one particle of mass
    density * area * 2 * thickness.  ``pin`` selects anchored particles.
    """
    if nx < 2 or ny < 2:
        raise ConfigError("flag needs at least a 2x2 patch grid")
    hx = width / (nx - 1)
    hy = height / (ny - 1)
    s_plane = 0.5 * max(hx, hy)
    if thickness >= s_plane:
        raise ConfigError(
            f"patch thickness {thickness:g} must stay below half spacing {s_plane:g}"
        )
    n = nx * ny
    ix, iy = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    ix = ix.reshape(-1)
    iy = iy.reshape(-1)
    positions = np.asarray(origin, dtype=float) + np.stack(
        [ix * hx, iy * hy, np.zeros(n)], axis=1
    )
    scaling = np.tile([s_plane, s_plane, thickness], (n, 1))
    rotation = np.tile(np.eye(3), (n, 1, 1))
    normal = np.tile([0.0, 0.0, 1.0], (n, 1))
    area = np.full(n, surface.patch_area([s_plane, s_plane, thickness]))
    patches = surface.Patches(
        rest_x=positions.copy(),
        scaling=scaling,
        rest_rotation=rotation,
        opacity=np.ones(n),
        color=np.tile(np.asarray(color, dtype=float), (n, 1)),
        rest_normal=normal,
        area=area,
    )
    particles = Particles.allocate(n)
    particles.x = positions.copy()
    volume = area * 2.0 * thickness
    particles.volume0 = volume
    particles.mass = material.density * volume
    particles.is_surface[:] = True
    particles.patch_index = np.arange(n, dtype=np.int64)
    particles.is_pinned = _resolve_pins(pin, ix, iy, nx, ny, hx, hy)
    return patches, particles


def _resolve_pins(pin, ix, iy, nx, ny, hx, hy):
    """Boolean pin mask from a selector string (see README grammar)."""
    selector = (pin or "none").strip()
    if selector == "none":
        return np.zeros(ix.shape[0], dtype=bool)
    if selector == "left_edge":
        return ix == 0
    if selector == "right_edge":
        return ix == nx - 1
    if selector == "bottom_edge":
        return iy == 0
    if selector == "top_edge":
        return iy == ny - 1
    if selector == "three_corners":
        # Bottom-left stays free.
        return (
            ((ix == 0) & (iy == ny - 1))
            | ((ix == nx - 1) & (iy == ny - 1))
            | ((ix == nx - 1) & (iy == 0))
        )
    if selector.startswith("corners:"):
        mask = np.zeros(ix.shape[0], dtype=bool)
        for name in selector[len("corners:") :].split("+"):
            name = name.strip()
            if name not in _CORNERS:
                raise ConfigError(f"unknown corner {name!r} in pin selector")
            cx, cy = _CORNERS[name]
            mask |= (ix == cx * (nx - 1)) & (iy == cy * (ny - 1))
        return mask
    if selector.startswith("region:"):
        try:
            x0, x1, y0, y1 = (float(p) for p in selector[len("region:") :].split(","))
        except ValueError as exc:
            raise ConfigError(f"bad region pin selector {selector!r}") from exc
        px = ix * hx
        py = iy * hy
        return (px >= x0) & (px <= x1) & (py >= y0) & (py <= y1)
    raise ConfigError(f"unknown pin selector {selector!r}")


def build_sand_block(dims, spacing, material, color=(0.76, 0.69, 0.50), origin=(0.0, 0.0, 0.0)):
    """Regular lattice fill with boundary particles flagged as surface.

    Every particle carries mass density * spacing^3; surface patches get
    outward-facing normals built from their boundary faces.
    """
    nx, ny, nz = (int(d) for d in dims)
    if min(nx, ny, nz) < 1:
        raise ConfigError("sand block dims must be positive")
    ii, jj, kk = np.meshgrid(
        np.arange(nx), np.arange(ny), np.arange(nz), indexing="ij"
    )
    ii = ii.reshape(-1)
    jj = jj.reshape(-1)
    kk = kk.reshape(-1)
    n = nx * ny * nz
    positions = np.asarray(origin, dtype=float) + spacing * np.stack(
        [ii, jj, kk], axis=1
    ).astype(float)
    outward = np.zeros((n, 3))
    outward[:, 0] += np.where(ii == 0, -1.0, 0.0) + np.where(ii == nx - 1, 1.0, 0.0)
    outward[:, 1] += np.where(jj == 0, -1.0, 0.0) + np.where(jj == ny - 1, 1.0, 0.0)
    outward[:, 2] += np.where(kk == 0, -1.0, 0.0) + np.where(kk == nz - 1, 1.0, 0.0)
    is_surface = np.linalg.norm(outward, axis=1) > 0.0
    normals = np.tile([0.0, 0.0, 1.0], (n, 1))
    normals[is_surface] = outward[is_surface] / np.linalg.norm(
        outward[is_surface], axis=1, keepdims=True
    )
    rotation = np.empty((n, 3, 3))
    for p in range(n):
        rotation[p] = surface.frame_from_normal(normals[p])
    s_plane = 0.5 * spacing
    s_norm = 0.25 * spacing
    scaling = np.tile([s_plane, s_plane, s_norm], (n, 1))
    area = np.full(n, surface.patch_area([s_plane, s_plane, s_norm]))
    patches = surface.Patches(
        rest_x=positions.copy(),
        scaling=scaling,
        rest_rotation=rotation,
        opacity=np.ones(n),
        color=np.tile(np.asarray(color, dtype=float), (n, 1)),
        rest_normal=normals,
        area=area,
    )
    particles = Particles.allocate(n)
    particles.x = positions.copy()
    particles.volume0 = np.full(n, spacing**3)
    particles.mass = material.density * particles.volume0
    particles.is_surface = is_surface
    particles.patch_index = np.arange(n, dtype=np.int64)
    return patches, particles


def apply_edit(scene, overrides):
    """Swap material parameters and/or intrinsic colors in place."""
    if overrides is None or overrides.is_empty():
        return scene
    if overrides.color is not None:
        scene.patches.color[:] = np.asarray(overrides.color, dtype=float)
    fields = {
        "model": overrides.model,
        "young_modulus": overrides.young_modulus,
        "poisson_ratio": overrides.poisson_ratio,
        "density": overrides.density,
        "friction_angle_deg": overrides.friction_angle_deg,
    }
    changes = {k: v for k, v in fields.items() if v is not None}
    if changes:
        scene.material = dataclasses.replace(scene.material, **changes)
        if "density" in changes:
            scene.particles.mass = scene.material.density * scene.particles.volume0
    return scene


def build_scene(config):
    """Construct patches, particles, and grid for a config."""
    if config.kind == FLAG:
        patches, particles = build_flag(
            config.nx,
            config.ny,
            config.width,
            config.height,
            config.thickness,
            config.material,
            pin=config.pin,
            color=config.color,
            origin=config.scene_origin,
        )
    else:
        patches, particles = build_sand_block(
            (config.nx, config.ny, config.nz),
            config.spacing,
            config.material,
            color=config.color,
            origin=config.scene_origin,
        )
    keep = surface.opacity_filter(patches.opacity, config.opacity_threshold)
    if keep.shape[0] < len(patches):
        patches = patches.select(keep)
        particles = _select_particles(particles, keep)
    if config.grid_dims is not None:
        dims = tuple(int(d) for d in config.grid_dims)
        if config.grid_origin is not None:
            grid_origin = np.asarray(config.grid_origin, dtype=float)
        else:
            center = 0.5 * (particles.x.min(axis=0) + particles.x.max(axis=0))
            grid_origin = center - 0.5 * (np.array(dims) - 1) * config.grid_dx
        grid = Grid(
            dims=dims,
            dx=config.grid_dx,
            origin=grid_origin,
            boundary_margin=config.grid_boundary_margin,
        )
    else:
        grid = Grid.from_bounds(
            particles.x.min(axis=0),
            particles.x.max(axis=0),
            config.grid_dx,
            boundary_margin=config.grid_boundary_margin,
        )
    mpm.check_in_domain(particles.x, grid)
    if np.any(particles.is_pinned):
        radius = config.pin_node_radius
        if radius is None:
            radius = grid.dx
        grid.pin_nodes_near(particles.x[particles.is_pinned], radius)
    scene = Scene(
        config=config,
        patches=patches,
        particles=particles,
        grid=grid,
        material=config.material,
    )
    return apply_edit(scene, config.edit)


def _select_particles(particles, indices):
    out = Particles.allocate(indices.shape[0])
    for f in dataclasses.fields(Particles):
        setattr(out, f.name, getattr(particles, f.name)[indices].copy())
    out.patch_index = np.arange(indices.shape[0], dtype=np.int64)
    return out


def _frame_flow(config, frame_index):
    if config.flow_late_base is not None and frame_index >= config.flow_switch_frame:
        return dataclasses.replace(
            config.flow, base_velocity=np.asarray(config.flow_late_base, dtype=float)
        )
    return config.flow


@dataclass
class RunSummary:
    """What a simulation run produced."""

    frames_written: int
    out_dir: str
    max_speed: float
    final_momentum: np.ndarray


def run_simulation(config, quiet=False):
    """Simulate, shade, render, and dump ``config.frames`` frames.

    Frame k on disk shows the state at time k * frame_dt; the solver then
    advances to the next frame time.  Returns a RunSummary; a solver
    blow-up aborts with the offending frame index in the message.
    """
    scene = build_scene(config)
    out_dir = config.out_dir
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(config.seed)
    step = config.step
    prev_normals = None
    max_speed = 0.0
    for frame in range(config.frames):
        t = frame * step.frame_dt
        flow = _frame_flow(config, frame)
        flow_velocity = wind.sample_flow(flow, t, rng)
        world = surface.transport_all(
            scene.patches, scene.particles.x, scene.particles.F, prev_normals
        )
        prev_normals = world.normal
        areas = None
        if config.aero_use_world_area:
            areas = surface.world_areas(scene.patches, scene.particles.F)
        forces = wind.aero_particle_forces(
            world,
            scene.patches,
            scene.particles,
            flow_velocity,
            flow,
            config.coeffs,
            surface_only=config.aero_surface_only,
            areas=areas,
            cos_attenuation=config.aero_cos_attenuation,
        )
        image = render.render_frame(
            world.x,
            world.cov,
            world.normal,
            scene.patches.color,
            scene.patches.opacity,
            config.camera,
            config.light,
            mode=config.shading_mode,
        )
        render.write_frame(image, os.path.join(out_dir, render.frame_filename(frame)))
        if config.dump_particles:
            mpm.write_particle_dump(
                os.path.join(out_dir, f"particles_{frame:04d}.txt"), scene.particles
            )
        if config.dump_patches:
            surface.write_patch_dump(
                os.path.join(out_dir, f"patches_{frame:04d}.txt"),
                world.x,
                world.normal,
                scene.patches.color,
                scene.patches.opacity,
            )
        try:
            diag = mpm.step_frame(
                scene.particles, scene.grid, scene.material, step, external_forces=forces
            )
        except (BlowUpError, DegenerateMatrixError) as exc:
            raise BlowUpError(f"frame {frame}: {exc}") from exc
        max_speed = max(max_speed, diag.max_speed)
        if not quiet and (frame % 25 == 0 or frame == config.frames - 1):
            print(
                f"frame {frame:4d}  max speed {diag.max_speed:8.3f} m/s  "
                f"|momentum| {np.linalg.norm(diag.total_momentum):.3e}"
            )
    _write_sidecar(out_dir, config)
    return RunSummary(
        frames_written=config.frames,
        out_dir=out_dir,
        max_speed=max_speed,
        final_momentum=scene.particles.total_momentum(),
    )


def _write_sidecar(out_dir, config):
    fps = 1.0 / config.step.frame_dt
    fps_text = f"{fps:.0f}" if abs(fps - round(fps)) < 1e-9 else f"{fps:g}"
    with open(os.path.join(out_dir, "frames_meta.txt"), "w") as fh:
        fh.write(f"fps {fps_text}\n")
        fh.write(f"frame_dt_s {config.step.frame_dt:.17g}\n")
        fh.write(f"frames {config.frames}\n")


def render_patch_dump(config, dump_path, out_path):
    """Render one frame from a patch dump file.

    The dump stores positions, normals, intrinsic colors, and opacities;
    patch footprints are rebuilt from the config's patch scale with each
    covariance oriented by the dumped normal.
    """
    positions, normals, colors, opacities = surface.read_patch_dump(dump_path)
    if config.kind == FLAG:
        hx = config.width / (config.nx - 1)
        hy = config.height / (config.ny - 1)
        s_plane = 0.5 * max(hx, hy)
        s_norm = config.thickness
    else:
        s_plane = 0.5 * config.spacing
        s_norm = 0.25 * config.spacing
    n = positions.shape[0]
    cov = np.empty((n, 3, 3))
    s2 = np.array([s_plane**2, s_plane**2, s_norm**2])
    for p in range(n):
        rot = surface.frame_from_normal(normals[p])
        cov[p] = (rot * s2) @ rot.T
    image = render.render_frame(
        positions,
        cov,
        normals,
        colors,
        opacities,
        config.camera,
        config.light,
        mode=config.shading_mode,
    )
    render.write_frame(image, out_path)
    return image


# --------------------------------------------------------------------------
# Config text format


def _parse_vec3(text, context):
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 3:
        raise ConfigError(f"{context}: expected three numbers, got {text!r}")
    try:
        return np.array([float(p) for p in parts])
    except ValueError as exc:
        raise ConfigError(f"{context}: bad number in {text!r}") from exc


def _parse_bool(text, context):
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ConfigError(f"{context}: expected a boolean, got {text!r}")


class _Section:
    def __init__(self, parser, name):
        self.name = name
        self.data = dict(parser[name]) if parser.has_section(name) else {}

    def get(self, key, kind=str, default=ConfigError):
        if key not in self.data:
            if default is ConfigError:
                raise ConfigError(f"[{self.name}] is missing required key {key!r}")
            return default
        raw = self.data[key]
        context = f"[{self.name}] {key}"
        if kind is str:
            return raw.strip()
        if kind is float:
            try:
                return float(raw)
            except ValueError as exc:
                raise ConfigError(f"{context}: bad number {raw!r}") from exc
        if kind is int:
            try:
                return int(raw)
            except ValueError as exc:
                raise ConfigError(f"{context}: bad integer {raw!r}") from exc
        if kind is bool:
            return _parse_bool(raw, context)
        if kind == "vec3":
            return _parse_vec3(raw, context)
        raise ValueError(f"unsupported kind {kind!r}")

    def has(self, key):
        return key in self.data


def config_from_text(text):
    """Parse a scene config from its text form."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc

    scene = _Section(parser, "scene")
    kind = scene.get("kind", str, FLAG)
    material_sec = _Section(parser, "material")
    model = material_sec.get("model", str, FIXED_COROTATED)
    material = MaterialParams(
        model=model,
        young_modulus=material_sec.get("young_modulus_pa", float),
        poisson_ratio=material_sec.get("poisson_ratio", float),
        density=material_sec.get("density_kg_m3", float),
        friction_angle_deg=material_sec.get("friction_angle_deg", float, 30.0),
    )
    aero = _Section(parser, "aero")
    coeffs = AeroCoefficients(
        drag=aero.get("drag", float, 0.0),
        friction=aero.get("friction", float, 0.0),
        lift=aero.get("lift", float, 0.0),
    )
    output = _Section(parser, "output")
    seed = output.get("seed", int, 0)
    flow_sec = _Section(parser, "flow")
    flow = FlowField(
        fluid_density=flow_sec.get("fluid_density_kg_m3", float, 1.225),
        base_velocity=flow_sec.get("base_velocity_m_s", "vec3", np.zeros(3)),
        sine_amplitude=flow_sec.get("sine_amplitude_m_s", "vec3", np.zeros(3)),
        sine_frequency=flow_sec.get("sine_frequency_rad_s", float, 1.0),
        gaussian_sigma=flow_sec.get("gaussian_sigma_m_s", float, 0.3),
        uniform_delta=flow_sec.get("uniform_delta", float, 0.3),
        seed=seed,
    )
    grid_sec = _Section(parser, "grid")
    grid_dims = None
    if grid_sec.has("dims"):
        dims_vec = grid_sec.get("dims", "vec3")
        grid_dims = tuple(int(round(d)) for d in dims_vec)
    step_sec = _Section(parser, "step")
    step = StepConfig(
        dt=step_sec.get("dt_s", float, 2e-4),
        frame_dt=step_sec.get("frame_dt_s", float, 0.04),
        gravity=step_sec.get("gravity_m_s2", "vec3", np.array([0.0, -9.8, 0.0])),
    )
    cam_sec = _Section(parser, "camera")
    camera = None
    if cam_sec.has("position_m"):
        camera = Camera(
            position=cam_sec.get("position_m", "vec3"),
            look_at=cam_sec.get("look_at_m", "vec3"),
            up=cam_sec.get("up", "vec3", np.array([0.0, 1.0, 0.0])),
            fov_y_deg=cam_sec.get("fov_y_deg", float, 40.0),
            width=cam_sec.get("width_px", int, 640),
            height=cam_sec.get("height_px", int, 360),
        )
    light_sec = _Section(parser, "light")
    light = LightConfig(
        direction=light_sec.get("direction", "vec3", np.array([0.0, 0.0, 1.0])),
        ambient=light_sec.get("ambient", float, 0.1),
        diffuse=light_sec.get("diffuse", float, 1.0),
        specular=light_sec.get("specular", float, 0.0),
        shininess=light_sec.get("shininess", float, 16.0),
        ambient_radiance=light_sec.get("ambient_radiance", float, 1.0),
        incident_radiance=light_sec.get("incident_radiance", float, 1.0),
    )
    edit = None
    if parser.has_section("edit"):
        edit_sec = _Section(parser, "edit")
        edit = EditOverrides(
            color=edit_sec.get("color", "vec3", None),
            model=edit_sec.get("model", str, None),
            young_modulus=edit_sec.get("young_modulus_pa", float, None),
            poisson_ratio=edit_sec.get("poisson_ratio", float, None),
            density=edit_sec.get("density_kg_m3", float, None),
            friction_angle_deg=edit_sec.get("friction_angle_deg", float, None),
        )
    return SceneConfig(
        kind=kind,
        nx=scene.get("nx", int, 20),
        ny=scene.get("ny", int, 30),
        nz=scene.get("nz", int, 8),
        width=scene.get("width_m", float, 1.0),
        height=scene.get("height_m", float, 1.5),
        spacing=scene.get("spacing_m", float, 0.04),
        thickness=scene.get("thickness_m", float, 0.005),
        scene_origin=scene.get("origin_m", "vec3", np.zeros(3)),
        pin=scene.get("pin", str, "none"),
        color=scene.get("color", "vec3", np.ones(3)),
        opacity_threshold=scene.get("opacity_threshold", float, 0.1),
        material=material,
        coeffs=coeffs,
        aero_surface_only=aero.get("surface_only", bool, True),
        aero_use_world_area=aero.get("world_area", bool, False),
        aero_cos_attenuation=aero.get("cos_attenuation", bool, False),
        flow=flow,
        flow_late_base=flow_sec.get("base_velocity_late_m_s", "vec3", None),
        flow_switch_frame=flow_sec.get("switch_frame", int, 0),
        grid_dx=grid_sec.get("dx_m", float, 0.05),
        grid_dims=grid_dims,
        grid_origin=grid_sec.get("origin_m", "vec3", None),
        grid_boundary_margin=grid_sec.get("boundary_margin_cells", int, 2),
        pin_node_radius=grid_sec.get("pin_node_radius_m", float, None),
        step=step,
        camera=camera,
        light=light,
        shading_mode=light_sec.get("mode", str, render.DIFFUSE),
        frames=output.get("frames", int, 250),
        seed=seed,
        out_dir=output.get("directory", str, "out"),
        dump_particles=output.get("dump_particles", bool, False),
        dump_patches=output.get("dump_patches", bool, False),
        edit=edit,
    )


def load_config(path):
    """Load a scene config file."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_text(text)


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    if isinstance(value, np.ndarray):
        return ", ".join(_fmt(float(v)) for v in value)
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    return str(value)


def config_to_text(config):
    """Serialize a config back to its text form (round-trip exact)."""
    out = io.StringIO()

    def section(name, pairs):
        rows = [(k, v) for k, v in pairs if v is not None]
        if not rows:
            return
        out.write(f"[{name}]\n")
        for key, value in rows:
            out.write(f"{key} = {_fmt(value)}\n")
        out.write("\n")

    section(
        "scene",
        [
            ("kind", config.kind),
            ("nx", config.nx),
            ("ny", config.ny),
            ("nz", config.nz if config.kind == SAND_BLOCK else None),
            ("width_m", config.width if config.kind == FLAG else None),
            ("height_m", config.height if config.kind == FLAG else None),
            ("spacing_m", config.spacing if config.kind == SAND_BLOCK else None),
            ("thickness_m", config.thickness if config.kind == FLAG else None),
            ("origin_m", config.scene_origin),
            ("pin", config.pin if config.kind == FLAG else None),
            ("color", config.color),
            ("opacity_threshold", config.opacity_threshold),
        ],
    )
    section(
        "material",
        [
            ("model", config.material.model),
            ("young_modulus_pa", config.material.young_modulus),
            ("poisson_ratio", config.material.poisson_ratio),
            ("density_kg_m3", config.material.density),
            (
                "friction_angle_deg",
                config.material.friction_angle_deg
                if config.material.model == DRUCKER_PRAGER
                else None,
            ),
        ],
    )
    section(
        "aero",
        [
            ("drag", config.coeffs.drag),
            ("friction", config.coeffs.friction),
            ("lift", config.coeffs.lift),
            ("surface_only", config.aero_surface_only),
            ("world_area", config.aero_use_world_area),
            ("cos_attenuation", config.aero_cos_attenuation),
        ],
    )
    section(
        "flow",
        [
            ("fluid_density_kg_m3", config.flow.fluid_density),
            ("base_velocity_m_s", config.flow.base_velocity),
            ("base_velocity_late_m_s", config.flow_late_base),
            ("switch_frame", config.flow_switch_frame if config.flow_late_base is not None else None),
            ("sine_amplitude_m_s", config.flow.sine_amplitude),
            ("sine_frequency_rad_s", config.flow.sine_frequency),
            ("gaussian_sigma_m_s", config.flow.gaussian_sigma),
            ("uniform_delta", config.flow.uniform_delta),
        ],
    )
    section(
        "grid",
        [
            ("dx_m", config.grid_dx),
            ("dims", config.grid_dims),
            ("origin_m", config.grid_origin),
            ("boundary_margin_cells", config.grid_boundary_margin),
            ("pin_node_radius_m", config.pin_node_radius),
        ],
    )
    section(
        "step",
        [
            ("dt_s", config.step.dt),
            ("frame_dt_s", config.step.frame_dt),
            ("gravity_m_s2", config.step.gravity),
        ],
    )
    section(
        "camera",
        [
            ("position_m", config.camera.position),
            ("look_at_m", config.camera.look_at),
            ("up", config.camera.up),
            ("fov_y_deg", config.camera.fov_y_deg),
            ("width_px", config.camera.width),
            ("height_px", config.camera.height),
        ],
    )
    section(
        "light",
        [
            ("direction", config.light.direction),
            ("mode", config.shading_mode),
            ("ambient", config.light.ambient),
            ("diffuse", config.light.diffuse),
            ("specular", config.light.specular),
            ("shininess", config.light.shininess),
            ("ambient_radiance", config.light.ambient_radiance),
            ("incident_radiance", config.light.incident_radiance),
        ],
    )
    section(
        "output",
        [
            ("frames", config.frames),
            ("seed", config.seed),
            ("directory", config.out_dir),
            ("dump_particles", config.dump_particles),
            ("dump_patches", config.dump_patches),
        ],
    )
    if config.edit is not None and not config.edit.is_empty():
        section(
            "edit",
            [
                ("color", config.edit.color),
                ("model", config.edit.model),
                ("young_modulus_pa", config.edit.young_modulus),
                ("poisson_ratio", config.edit.poisson_ratio),
                ("density_kg_m3", config.edit.density),
                ("friction_angle_deg", config.edit.friction_angle_deg),
            ],
        )
    return out.getvalue()


def preset_names():
    """Sorted names of the shipped presets."""
    files = resources.files("aerosplat").joinpath("presets")
    return sorted(
        entry.name[: -len(".cfg")]
        for entry in files.iterdir()
        if entry.name.endswith(".cfg")
    )


def preset_text(name):
    """Raw config text of a shipped preset."""
    path = resources.files("aerosplat").joinpath("presets", f"{name}.cfg")
    if not path.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {preset_names()}")
    return path.read_text()


def load_preset(name):
    """Parse a shipped preset into a SceneConfig."""
    return config_from_text(preset_text(name))
