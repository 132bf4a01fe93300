"""Built-in experiment presets, one per row of the model hyper-parameter table."""

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Preset:
    name: str
    system: str
    row: str  # table row label
    loss: dict = field(default_factory=dict)
    network: dict = field(default_factory=dict)  # activation, scale
    wave: dict = None  # second network (PIB joint training only)
    dataset_size: int = 2500
    epochs: int = 1000
    grid: int = 201

    def describe(self):
        act = self.network.get("activation") or "none"
        scale = self.network.get("scale")
        return f"{self.row}: {self.system}, {self.loss['kind']} loss, final {act}/{scale or 'none'}, {self.dataset_size} samples, {self.epochs} epochs"


PRESETS = {
    p.name: p
    for p in (
        Preset("ho1d-tise", "ho1d:n=0", "Harmonic Oscillator",
               {"kind": "tise"}, {"activation": "sigmoid", "scale": 12.5}, dataset_size=2500, epochs=1000),
        Preset("pt-tise", "pt:l=2,mu=1", "Poschl-Teller potential",
               {"kind": "tise", "ic": (0.0, -3.0)}, {}, dataset_size=2500, epochs=500),
        Preset("hydrogen-tise", "h:n=2,l=1", "Radial Hydrogen atom",
               {"kind": "tise", "ic": (1.0, 0.0)}, {}, dataset_size=2500, epochs=1000),
        Preset("ho2d-tise", "ho2d:nx=0,ny=0", "2D Harmonic Oscillator",
               {"kind": "tise"}, {"activation": "sigmoid"}, dataset_size=5000, epochs=1000),
        Preset("pib-potential", "pib:n=1", "Potential for Particle in a Box",
               {"kind": "tise"}, {"activation": "sigmoid", "scale": 10.0}, dataset_size=4000, epochs=1000),
        Preset("pib-perturbation", "pib:n=1", "Perturbation for Particle in a Box",
               {"kind": "supervised_pib"}, {"activation": "sigmoid", "scale": 10.0}, wave={},
               dataset_size=4000, epochs=1000),
        Preset("soliton-tdse", "soliton", "Soliton",
               {"kind": "tdse"}, {}, dataset_size=3000, epochs=500, grid=51),
        Preset("ho-wigner", "wigner-ho", "Harmonic Oscillator from Wigner",
               {"kind": "wigner", "order": 0, "ic": (0.0, 0.0)}, {}, dataset_size=5000, epochs=1000),
        Preset("pt-wigner-k1", "wigner-pt", "Poschl-Teller from Wigner",
               {"kind": "wigner", "order": 1, "ic": (0.0, -3.0)}, {}, dataset_size=2000, epochs=1000),
    )
}


def preset_names():
    return list(PRESETS)
