//! Pauli-frame simulation of the switching protocol.
//!
//! Frames record deviations from the ideal circuit. A wrong logical
//! measurement outcome turns the corresponding teleportation fixup into a
//! logical error on the receiving register.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decoders::{Basis, Budgets, SingleShotDecoder};
use crate::gf2::BitVec;
use crate::hgp::CssCode;
use crate::homomorphic::CnotSchedule;
use crate::noise::{sample_iid, substream, NoiseModel};
use crate::scans::ReducedWeight;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("unknown register {0}")]
    UnknownRegister(String),
    #[error("unknown code {0}")]
    UnknownCode(String),
    #[error("register {0} was measured and cannot be reused")]
    Consumed(String),
    #[error("register {reg} must be prepared in {expected:?}")]
    WrongState { reg: String, expected: PrepState },
    #[error("registers {0} and {1} hold different codes")]
    CodeMismatch(String, String),
    #[error("no homomorphic schedule from code {0} to code {1}")]
    NoSchedule(String, String),
    #[error("no verified CCZ support loaded")]
    NoCczSupport,
    #[error("{0}")]
    Invalid(String),
}

/// Preparation record of a register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrepState {
    Plus,
    Zero,
    Data,
    Consumed,
}

/// X/Z deviation vectors plus unresolved diagonal byproducts
/// `(register, qubit, register, qubit)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliFrame {
    pub x: BitVec,
    pub z: BitVec,
    pub pending_cz: Vec<(usize, usize, usize, usize)>,
}

impl PauliFrame {
    pub fn zeros(n: usize) -> Self {
        Self { x: BitVec::zeros(n), z: BitVec::zeros(n), pending_cz: Vec::new() }
    }

    pub fn weight(&self) -> usize {
        self.x.weight() + self.z.weight()
    }
}

/// A code plus its decoders and logical representatives, shared by registers.
#[derive(Debug)]
pub struct CodeContext {
    pub name: String,
    pub code: CssCode,
    /// Decodes X errors from `H_Z` syndromes.
    pub dec_x: SingleShotDecoder,
    /// Decodes Z errors from `H_X` syndromes.
    pub dec_z: SingleShotDecoder,
    pub active: usize,
    pub is_3d: bool,
    x_logicals: Vec<BitVec>,
    z_logicals: Vec<BitVec>,
    reduced: OnceLock<[ReducedWeight; 2]>,
}

/// Search cap of the coset-minimum residual weight; over it the raw weight is reported.
const REDUCED_CAP: u64 = 1 << 12;

impl CodeContext {
    pub fn new(name: impl Into<String>, code: CssCode, budgets: Budgets) -> Arc<Self> {
        let dec_x = SingleShotDecoder::for_code(&code, Basis::X, budgets);
        let dec_z = SingleShotDecoder::for_code(&code, Basis::Z, budgets);
        let active = code.active_logicals();
        let x_logicals = (0..active).map(|i| code.x_logical(i)).collect();
        let z_logicals = (0..active).map(|i| code.z_logical(i)).collect();
        Arc::new(Self {
            name: name.into(),
            is_3d: code.m_z.is_some(),
            code,
            dec_x,
            dec_z,
            active,
            x_logicals,
            z_logicals,
            reduced: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.code.n()
    }

    pub fn x_logical(&self, i: usize) -> &BitVec {
        &self.x_logicals[i]
    }

    pub fn z_logical(&self, i: usize) -> &BitVec {
        &self.z_logicals[i]
    }

    /// Active logical flips caused by an error of type `basis`.
    pub fn logical_flips(&self, e: &BitVec, basis: Basis) -> BitVec {
        let reps = match basis {
            Basis::X => &self.z_logicals,
            Basis::Z => &self.x_logicals,
        };
        let mut f = BitVec::zeros(self.active);
        for (i, r) in reps.iter().enumerate() {
            if r.dot(e) {
                f.set(i, true);
            }
        }
        f
    }

    /// Sum of the active logical representatives of type `basis` selected by `f`.
    pub fn logical_operator(&self, f: &BitVec, basis: Basis) -> BitVec {
        let reps = match basis {
            Basis::X => &self.x_logicals,
            Basis::Z => &self.z_logicals,
        };
        f.iter_ones().fold(BitVec::zeros(self.n()), |acc, i| acc.xor(&reps[i]))
    }

    /// Frame weight modulo same-type stabilizers, summed over the error types that EC decodes.
    /// On 3D codes the deferred Z frame is excluded.
    pub fn residual_weight(&self, f: &PauliFrame) -> usize {
        let [rx, rz] = self.reduced.get_or_init(|| {
            [ReducedWeight::new(&self.code, Basis::X, REDUCED_CAP), ReducedWeight::new(&self.code, Basis::Z, REDUCED_CAP)]
        });
        let wx = rx.weight(&f.x).unwrap_or(f.x.weight());
        if self.is_3d {
            wx
        } else {
            wx + rz.weight(&f.z).unwrap_or(f.z.weight())
        }
    }

    /// Decodes a perfectly known error pattern and returns the residual.
    pub fn ideal_residual(&self, e: &BitVec, basis: Basis) -> BitVec {
        let dec = match basis {
            Basis::X => &self.dec_x,
            Basis::Z => &self.dec_z,
        };
        let s = dec.checks().mul_vec(e);
        e.xor(&dec.decode(&s).correction)
    }
}

#[derive(Clone, Debug)]
pub struct Register {
    pub name: String,
    pub ctx: Arc<CodeContext>,
    pub frame: PauliFrame,
    pub state: PrepState,
}

impl Register {
    pub fn new(name: impl Into<String>, ctx: Arc<CodeContext>, state: PrepState) -> Self {
        let n = ctx.n();
        Self { name: name.into(), ctx, frame: PauliFrame::zeros(n), state }
    }
}

/// Single-qubit Pauli fault.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// Fault applied just before primitive operation number `boundary` of a trial
/// (or at the end when `boundary` equals the operation count).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fault {
    pub boundary: usize,
    pub register: String,
    pub qubit: usize,
    pub pauli: Pauli,
}

/// One row of the result table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub trial: u64,
    pub script_step: usize,
    pub gadget: String,
    pub r_in: usize,
    pub s_during: usize,
    pub metacode_fail: bool,
    pub logical_fail_x: bool,
    pub logical_fail_z: bool,
    pub residual_weight: usize,
}

/// Triples of the verified CCZ support, indexed per block.
#[derive(Clone, Debug, Default)]
pub struct CczContext {
    pub support: Vec<[usize; 3]>,
    by_block: [HashMap<usize, Vec<(usize, usize)>>; 3],
}

impl CczContext {
    pub fn new(support: Vec<[usize; 3]>) -> Self {
        let mut by_block: [HashMap<usize, Vec<(usize, usize)>>; 3] = Default::default();
        for t in &support {
            by_block[0].entry(t[0]).or_default().push((t[1], t[2]));
            by_block[1].entry(t[1]).or_default().push((t[0], t[2]));
            by_block[2].entry(t[2]).or_default().push((t[0], t[1]));
        }
        Self { support, by_block }
    }

    /// Pairs on the other two blocks that a bit of block `b` at `j` couples.
    pub fn byproduct_pairs(&self, b: usize, j: usize) -> &[(usize, usize)] {
        self.by_block[b].get(&j).map_or(&[], Vec::as_slice)
    }
}

/// Resolution of diagonal CZ byproducts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ByproductModel {
    /// Uniform over `{II, ZI, IZ, ZZ}`.
    Twirl,
    /// Always `ZZ`.
    WorstCase,
}

/// Script step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Step {
    PrepZero2d { reg: String, code: String },
    PrepPlus2d { reg: String, code: String },
    PrepPlus3d { reg: String, code: String },
    /// Noiseless data register carrying the given logical Paulis.
    PrepData {
        reg: String,
        code: String,
        #[serde(default)]
        logical_x: Vec<usize>,
        #[serde(default)]
        logical_z: Vec<usize>,
    },
    Ec {
        reg: String,
        #[serde(default = "one")]
        rounds: usize,
    },
    Expand { src: String, dst: String, anc: String },
    Contract { src: String, dst: String, anc: String },
    Measure { reg: String, basis: Basis },
    Ccz {
        regs: [String; 3],
        #[serde(default = "twirl")]
        model: ByproductModel,
    },
    /// Ideal decoding followed by a logical comparison; bases default to both.
    Check {
        reg: String,
        #[serde(default)]
        bases: Vec<Basis>,
    },
}

fn one() -> usize {
    1
}

fn twirl() -> ByproductModel {
    ByproductModel::Twirl
}

impl Step {
    pub fn name(&self) -> &'static str {
        match self {
            Step::PrepZero2d { .. } => "prep_zero_2d",
            Step::PrepPlus2d { .. } => "prep_plus_2d",
            Step::PrepPlus3d { .. } => "prep_plus_3d",
            Step::PrepData { .. } => "prep_data",
            Step::Ec { .. } => "ec",
            Step::Expand { .. } => "expand",
            Step::Contract { .. } => "contract",
            Step::Measure { .. } => "measure",
            Step::Ccz { .. } => "ccz",
            Step::Check { .. } => "check",
        }
    }
}

/// Codes, homomorphic schedules and CCZ support available to scripts.
#[derive(Clone, Default)]
pub struct ProtocolSetup {
    pub codes: HashMap<String, Arc<CodeContext>>,
    /// `(3D code, 2D code) → schedule` with control in the 3D code.
    pub schedules: HashMap<(String, String), CnotSchedule>,
    pub ccz: Option<Arc<CczContext>>,
    /// Interleave one EC round on the receiving registers after each gate gadget.
    pub auto_ec: bool,
}

impl ProtocolSetup {
    pub fn add_code(&mut self, ctx: Arc<CodeContext>) {
        self.codes.insert(ctx.name.clone(), ctx);
    }
}

/// Logical outcome deviations of a transversal measurement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasureOutcome {
    pub flips: BitVec,
    pub decode_ok: bool,
    pub injected: usize,
}

/// Per-trial simulator state.
pub struct Simulator<'a> {
    setup: &'a ProtocolSetup,
    regs: Vec<Register>,
    names: HashMap<String, usize>,
    noise: NoiseModel,
    rng: ChaCha8Rng,
    faults: Vec<Fault>,
    boundary: usize,
    /// Live register sizes at each boundary, for fault enumeration.
    pub boundary_log: Vec<Vec<(String, usize)>>,
    /// Raw readout deviation of every transversal measurement, in order.
    pub readouts: Vec<Readout>,
    skip_fixups: bool,
    /// Logical outcomes of every check and measurement, in order.
    pub outcomes: Vec<BitVec>,
    reference: Option<Vec<BitVec>>,
}

/// Readout deviation of one transversal measurement; `basis` is the error type it reveals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Readout {
    pub register: String,
    pub code: String,
    pub basis: Basis,
    pub bits: BitVec,
}

impl<'a> Simulator<'a> {
    pub fn new(setup: &'a ProtocolSetup, noise: NoiseModel, rng: ChaCha8Rng) -> Self {
        Self {
            setup,
            regs: Vec::new(),
            names: HashMap::new(),
            noise,
            rng,
            faults: Vec::new(),
            boundary: 0,
            boundary_log: Vec::new(),
            readouts: Vec::new(),
            skip_fixups: false,
            outcomes: Vec::new(),
            reference: None,
        }
    }

    /// Compares logical outcomes against those of a noiseless run instead of zero.
    pub fn with_reference(mut self, reference: Vec<BitVec>) -> Self {
        self.reference = Some(reference);
        self
    }

    /// Records a logical outcome; true if it deviates from the reference.
    fn deviates(&mut self, flips: BitVec) -> bool {
        let k = self.outcomes.len();
        let bad = match self.reference.as_ref().and_then(|r| r.get(k)) {
            Some(r) => *r != flips,
            None => !flips.is_zero(),
        };
        self.outcomes.push(flips);
        bad
    }

    /// Pure Pauli propagation: teleportation fixups are not applied, so the
    /// readouts and frames are linear in the injected faults.
    pub fn raw(mut self) -> Self {
        self.skip_fixups = true;
        self
    }

    pub fn with_faults(mut self, faults: Vec<Fault>) -> Self {
        self.faults = faults;
        self
    }

    pub fn register(&self, name: &str) -> Result<&Register, ProtocolError> {
        self.names.get(name).map(|&i| &self.regs[i]).ok_or_else(|| ProtocolError::UnknownRegister(name.into()))
    }

    fn idx(&self, name: &str) -> Result<usize, ProtocolError> {
        let i = *self.names.get(name).ok_or_else(|| ProtocolError::UnknownRegister(name.into()))?;
        if self.regs[i].state == PrepState::Consumed {
            return Err(ProtocolError::Consumed(name.into()));
        }
        Ok(i)
    }

    fn ctx(&self, code: &str) -> Result<Arc<CodeContext>, ProtocolError> {
        self.setup.codes.get(code).cloned().ok_or_else(|| ProtocolError::UnknownCode(code.into()))
    }

    fn install(&mut self, name: &str, ctx: Arc<CodeContext>, state: PrepState) -> usize {
        let reg = Register::new(name, ctx, state);
        match self.names.get(name) {
            Some(&i) => {
                self.regs[i] = reg;
                i
            }
            None => {
                self.regs.push(reg);
                self.names.insert(name.into(), self.regs.len() - 1);
                self.regs.len() - 1
            }
        }
    }

    fn iid(&mut self, n: usize, p: f64) -> BitVec {
        sample_iid(n, p, &mut self.rng)
    }

    /// Applies scheduled faults at the current boundary and advances it.
    fn tick(&mut self) -> usize {
        let live: Vec<(String, usize)> =
            self.regs.iter().filter(|r| r.state != PrepState::Consumed).map(|r| (r.name.clone(), r.ctx.n())).collect();
        self.boundary_log.push(live);
        let mut count = 0;
        let here: Vec<Fault> = self.faults.iter().filter(|f| f.boundary == self.boundary).cloned().collect();
        for f in here {
            if let Some(&i) = self.names.get(&f.register) {
                let fr = &mut self.regs[i].frame;
                if matches!(f.pauli, Pauli::X | Pauli::Y) {
                    fr.x.flip(f.qubit);
                }
                if matches!(f.pauli, Pauli::Z | Pauli::Y) {
                    fr.z.flip(f.qubit);
                }
                count += 1;
            }
        }
        self.boundary += 1;
        count
    }

    /// Number of primitive operations executed so far.
    pub fn boundary(&self) -> usize {
        self.boundary
    }

    /// Applies end-of-circuit faults.
    pub fn finish(&mut self) {
        self.tick();
    }

    fn gate_noise(&mut self, i: usize) -> usize {
        let p = self.noise.p_data;
        if p == 0.0 {
            return 0;
        }
        let n = self.regs[i].ctx.n();
        let ex = self.iid(n, p);
        let ez = self.iid(n, p);
        let w = ex.weight() + ez.weight();
        self.regs[i].frame.x.xor_assign(&ex);
        self.regs[i].frame.z.xor_assign(&ez);
        w
    }

    pub fn prep_zero_2d(&mut self, reg: &str, code: &str) -> Result<TraceEntry, ProtocolError> {
        self.prep_2d(reg, code, PrepState::Zero)
    }

    pub fn prep_plus_2d(&mut self, reg: &str, code: &str) -> Result<TraceEntry, ProtocolError> {
        self.prep_2d(reg, code, PrepState::Plus)
    }

    fn prep_2d(&mut self, reg: &str, code: &str, state: PrepState) -> Result<TraceEntry, ProtocolError> {
        let ctx = self.ctx(code)?;
        let p = self.noise.c_bl * self.noise.p_data;
        let n = ctx.n();
        let i = self.install(reg, ctx, state);
        let x = self.iid(n, p);
        let z = self.iid(n, p);
        let s = x.weight() + z.weight();
        self.regs[i].frame.x = x;
        self.regs[i].frame.z = z;
        Ok(self.entry(if state == PrepState::Zero { "prep_zero_2d" } else { "prep_plus_2d" }, 0, s, false, i))
    }

    /// Single-shot `|+⟩` preparation of a metachecked code: iid data noise,
    /// one noisy `H_Z` syndrome, metacheck repair and decoding of X errors.
    pub fn prep_plus_3d(&mut self, reg: &str, code: &str) -> Result<TraceEntry, ProtocolError> {
        let ctx = self.ctx(code)?;
        if ctx.code.m_z.is_none() {
            return Err(ProtocolError::Invalid(format!("code {code} has no metacheck")));
        }
        let n = ctx.n();
        let i = self.install(reg, ctx.clone(), PrepState::Plus);
        let p = self.noise.p_data;
        let q = self.noise.q_synd;
        let x = self.iid(n, p);
        let z = self.iid(n, p);
        let m = ctx.code.h_z.rows();
        let s_err = self.iid(m, q);
        let s_during = x.weight() + z.weight() + s_err.weight();
        let s_obs = ctx.code.h_z.mul_vec(&x).xor(&s_err);
        let out = ctx.dec_x.decode(&s_obs);
        self.regs[i].frame.x = x.xor(&out.correction);
        self.regs[i].frame.z = z;
        Ok(self.entry("prep_plus_3d", 0, s_during, !out.metacode_success, i))
    }

    pub fn prep_data(&mut self, reg: &str, code: &str, lx: &[usize], lz: &[usize]) -> Result<TraceEntry, ProtocolError> {
        let ctx = self.ctx(code)?;
        let i = self.install(reg, ctx.clone(), PrepState::Data);
        for &a in lx {
            let v = ctx.x_logical(a).clone();
            self.regs[i].frame.x.xor_assign(&v);
        }
        for &b in lz {
            let v = ctx.z_logical(b).clone();
            self.regs[i].frame.z.xor_assign(&v);
        }
        Ok(self.entry("prep_data", 0, 0, false, i))
    }

    /// One round: iid data noise, noisy syndromes, repair and decode. 3D codes
    /// decode only X errors; the other basis is deferred.
    pub fn ec_round(&mut self, reg: &str) -> Result<TraceEntry, ProtocolError> {
        let i = self.idx(reg)?;
        let r_in = self.residual(i);
        let ctx = self.regs[i].ctx.clone();
        let (n, p, q) = (ctx.n(), self.noise.p_data, self.noise.q_synd);
        let ex = self.iid(n, p);
        let ez = self.iid(n, p);
        let mut s_during = ex.weight() + ez.weight();
        self.regs[i].frame.x.xor_assign(&ex);
        self.regs[i].frame.z.xor_assign(&ez);
        let mut meta_fail = false;
        let sx_err = self.iid(ctx.code.h_z.rows(), q);
        s_during += sx_err.weight();
        let sx = ctx.code.h_z.mul_vec(&self.regs[i].frame.x).xor(&sx_err);
        let ox = ctx.dec_x.decode(&sx);
        meta_fail |= !ox.metacode_success;
        self.regs[i].frame.x.xor_assign(&ox.correction);
        if !ctx.is_3d {
            let sz_err = self.iid(ctx.code.h_x.rows(), q);
            s_during += sz_err.weight();
            let sz = ctx.code.h_x.mul_vec(&self.regs[i].frame.z).xor(&sz_err);
            let oz = ctx.dec_z.decode(&sz);
            meta_fail |= !oz.metacode_success;
            self.regs[i].frame.z.xor_assign(&oz.correction);
        }
        Ok(self.entry("ec", r_in, s_during, meta_fail, i))
    }

    /// `x_tgt ⊕= x_ctrl`, `z_ctrl ⊕= z_tgt` qubit by qubit.
    pub fn transversal_cnot(&mut self, ctrl: &str, tgt: &str) -> Result<usize, ProtocolError> {
        let (c, t) = (self.idx(ctrl)?, self.idx(tgt)?);
        if self.regs[c].ctx.name != self.regs[t].ctx.name {
            return Err(ProtocolError::CodeMismatch(ctrl.into(), tgt.into()));
        }
        let injected = self.tick();
        let xc = self.regs[c].frame.x.clone();
        let zt = self.regs[t].frame.z.clone();
        self.regs[t].frame.x.xor_assign(&xc);
        self.regs[c].frame.z.xor_assign(&zt);
        Ok(injected + self.gate_noise(c) + self.gate_noise(t))
    }

    /// CNOTs along the schedule from a 3D control register to a 2D target.
    pub fn homomorphic_cnot(&mut self, ctrl: &str, tgt: &str) -> Result<usize, ProtocolError> {
        let (c, t) = (self.idx(ctrl)?, self.idx(tgt)?);
        let key = (self.regs[c].ctx.name.clone(), self.regs[t].ctx.name.clone());
        let setup = self.setup;
        let sched = setup.schedules.get(&key).ok_or_else(|| ProtocolError::NoSchedule(key.0.clone(), key.1.clone()))?;
        let injected = self.tick();
        for &(qc, qt) in &sched.pairs {
            if self.regs[c].frame.x.get(qc) {
                self.regs[t].frame.x.flip(qt);
            }
            if self.regs[t].frame.z.get(qt) {
                self.regs[c].frame.z.flip(qc);
            }
        }
        Ok(injected + self.gate_noise(c) + self.gate_noise(t))
    }

    /// Transversal measurement: readout deviation, classical decoding of the
    /// readout syndrome and logical parities. Consumes the register.
    pub fn transversal_measure(&mut self, reg: &str, basis: Basis) -> Result<MeasureOutcome, ProtocolError> {
        let i = self.idx(reg)?;
        let injected = self.tick();
        let ctx = self.regs[i].ctx.clone();
        let n = ctx.n();
        let flips = self.iid(n, self.noise.q_synd);
        let err_type = match basis {
            Basis::Z => Basis::X,
            Basis::X => Basis::Z,
        };
        let raw = match err_type {
            Basis::X => &self.regs[i].frame.x,
            Basis::Z => &self.regs[i].frame.z,
        };
        let readout = raw.xor(&flips);
        self.readouts.push(Readout { register: reg.into(), code: ctx.name.clone(), basis: err_type, bits: readout.clone() });
        let dec = match err_type {
            Basis::X => &ctx.dec_x,
            Basis::Z => &ctx.dec_z,
        };
        let out = dec.decode(&dec.checks().mul_vec(&readout));
        let residual = readout.xor(&out.correction);
        self.regs[i].state = PrepState::Consumed;
        Ok(MeasureOutcome {
            flips: ctx.logical_flips(&residual, err_type),
            decode_ok: out.decode_status == crate::decoders::DecodeStatus::Ok,
            injected: injected + flips.weight(),
        })
    }

    fn fixup(&mut self, reg: usize, flips: &BitVec, basis: Basis) {
        if self.skip_fixups {
            return;
        }
        let ctx = self.regs[reg].ctx.clone();
        let k = ctx.active.min(flips.len());
        let f = BitVec::from_support(ctx.active, &flips.iter_ones().filter(|&i| i < k).collect::<Vec<_>>());
        let op = ctx.logical_operator(&f, basis);
        match basis {
            Basis::X => self.regs[reg].frame.x.xor_assign(&op),
            Basis::Z => self.regs[reg].frame.z.xor_assign(&op),
        }
    }

    /// Teleports `src` (2D) into `dst` (3D, prepared `|+⟩`) through `anc` (2D, prepared `|0⟩`).
    pub fn expand(&mut self, src: &str, dst: &str, anc: &str) -> Result<TraceEntry, ProtocolError> {
        self.teleport("expand", src, dst, anc, true)
    }

    /// Teleports `src` (3D) into `dst` (2D, prepared `|+⟩`) through `anc` (2D, prepared `|0⟩`).
    pub fn contract(&mut self, src: &str, dst: &str, anc: &str) -> Result<TraceEntry, ProtocolError> {
        self.teleport("contract", src, dst, anc, false)
    }

    fn teleport(&mut self, name: &str, src: &str, dst: &str, anc: &str, expanding: bool) -> Result<TraceEntry, ProtocolError> {
        let (s, d, a) = (self.idx(src)?, self.idx(dst)?, self.idx(anc)?);
        if self.regs[d].state != PrepState::Plus {
            return Err(ProtocolError::WrongState { reg: dst.into(), expected: PrepState::Plus });
        }
        if self.regs[a].state != PrepState::Zero {
            return Err(ProtocolError::WrongState { reg: anc.into(), expected: PrepState::Zero });
        }
        let r_in = self.residual(s) + self.residual(d) + self.residual(a);
        let mut s_during = 0;
        // The 3D register controls the homomorphic CNOT onto the ancilla.
        let (three_d, copy_from) = if expanding { (dst, src) } else { (src, dst) };
        s_during += self.homomorphic_cnot(three_d, anc)?;
        s_during += self.transversal_cnot(copy_from, anc)?;
        let mz = self.transversal_measure(anc, Basis::Z)?;
        s_during += mz.injected;
        self.fixup(d, &mz.flips, Basis::X);
        let mx = self.transversal_measure(src, Basis::X)?;
        s_during += mx.injected;
        self.fixup(d, &mx.flips, Basis::Z);
        self.regs[d].state = PrepState::Data;
        let mut e = self.entry(name, r_in, s_during, !(mz.decode_ok && mx.decode_ok), d);
        e.residual_weight = self.residual(d);
        Ok(e)
    }

    /// Transversal CCZ on three registers: each X-frame bit induces CZ
    /// byproducts on the paired qubits of the other two blocks, resolved by
    /// the byproduct model.
    pub fn ccz_gadget(&mut self, regs: &[String; 3], model: ByproductModel) -> Result<TraceEntry, ProtocolError> {
        let ccz = self.setup.ccz.clone().ok_or(ProtocolError::NoCczSupport)?;
        let idx = [self.idx(&regs[0])?, self.idx(&regs[1])?, self.idx(&regs[2])?];
        let r_in: usize = idx.iter().map(|&i| self.residual(i)).sum();
        let injected = self.tick();
        let xs: Vec<BitVec> = idx.iter().map(|&i| self.regs[i].frame.x.clone()).collect();
        let mut byproducts = 0;
        for b in 0..3 {
            let others = [(b + 1) % 3, (b + 2) % 3];
            let (o1, o2) = (others[0].min(others[1]), others[0].max(others[1]));
            for j in xs[b].iter_ones() {
                for &(u, v) in ccz.byproduct_pairs(b, j) {
                    byproducts += 1;
                    let (z1, z2) = match model {
                        ByproductModel::WorstCase => (true, true),
                        ByproductModel::Twirl => {
                            let r: u8 = self.rng.gen_range(0..4);
                            (r & 1 == 1, r & 2 == 2)
                        }
                    };
                    if z1 {
                        self.regs[idx[o1]].frame.z.flip(u);
                    }
                    if z2 {
                        self.regs[idx[o2]].frame.z.flip(v);
                    }
                }
            }
        }
        let mut e = self.entry("ccz", r_in, injected + byproducts, false, idx[0]);
        e.residual_weight = idx.iter().map(|&i| self.residual(i)).sum();
        Ok(e)
    }

    /// Logical flips left after ideal decoding of the register's frame.
    pub fn logical_errors(&self, reg: &str) -> Result<(BitVec, BitVec), ProtocolError> {
        let r = self.register(reg)?;
        let ctx = &r.ctx;
        let rx = ctx.ideal_residual(&r.frame.x, Basis::X);
        let rz = ctx.ideal_residual(&r.frame.z, Basis::Z);
        Ok((ctx.logical_flips(&rx, Basis::X), ctx.logical_flips(&rz, Basis::Z)))
    }

    /// Ideal decoding and logical comparison. X flips on a `|+⟩` register
    /// and Z flips on a `|0⟩` register act trivially and are not counted.
    pub fn check(&mut self, reg: &str, bases: &[Basis]) -> Result<TraceEntry, ProtocolError> {
        let i = self.idx(reg)?;
        let (fx, fz) = self.logical_errors(reg)?;
        let state = self.regs[i].state;
        let want = |b: Basis| bases.is_empty() || bases.contains(&b);
        let mut e = self.entry("check", self.residual(i), 0, false, i);
        let (dx, dz) = (self.deviates(fx), self.deviates(fz));
        e.logical_fail_x = want(Basis::X) && state != PrepState::Plus && dx;
        e.logical_fail_z = want(Basis::Z) && state != PrepState::Zero && dz;
        Ok(e)
    }

    fn residual(&self, i: usize) -> usize {
        self.regs[i].ctx.residual_weight(&self.regs[i].frame)
    }

    fn entry(&self, gadget: &str, r_in: usize, s_during: usize, metacode_fail: bool, reg: usize) -> TraceEntry {
        TraceEntry {
            trial: 0,
            script_step: 0,
            gadget: gadget.into(),
            r_in,
            s_during,
            metacode_fail,
            logical_fail_x: false,
            logical_fail_z: false,
            residual_weight: self.residual(reg),
        }
    }

    /// Executes one script step; gate gadgets are followed by EC on their
    /// outputs when the setup asks for interleaving.
    pub fn run_step(&mut self, step: &Step) -> Result<Vec<TraceEntry>, ProtocolError> {
        let mut out = Vec::new();
        match step {
            Step::PrepZero2d { reg, code } => out.push(self.prep_zero_2d(reg, code)?),
            Step::PrepPlus2d { reg, code } => out.push(self.prep_plus_2d(reg, code)?),
            Step::PrepPlus3d { reg, code } => out.push(self.prep_plus_3d(reg, code)?),
            Step::PrepData { reg, code, logical_x, logical_z } => out.push(self.prep_data(reg, code, logical_x, logical_z)?),
            Step::Ec { reg, rounds } => {
                for _ in 0..*rounds {
                    out.push(self.ec_round(reg)?);
                }
            }
            Step::Expand { src, dst, anc } => {
                out.push(self.expand(src, dst, anc)?);
                if self.setup.auto_ec {
                    out.push(self.ec_round(dst)?);
                }
            }
            Step::Contract { src, dst, anc } => {
                out.push(self.contract(src, dst, anc)?);
                if self.setup.auto_ec {
                    out.push(self.ec_round(dst)?);
                }
            }
            Step::Measure { reg, basis } => {
                let i = self.idx(reg)?;
                let state = self.regs[i].state;
                let r_in = self.residual(i);
                let m = self.transversal_measure(reg, *basis)?;
                let mut e = self.entry("measure", r_in, m.injected, !m.decode_ok, i);
                let counts = match (basis, state) {
                    (_, PrepState::Data) => true,
                    (Basis::X, PrepState::Plus) | (Basis::Z, PrepState::Zero) => true,
                    _ => false,
                };
                let failed = self.deviates(m.flips) && counts;
                match basis {
                    Basis::X => e.logical_fail_z = failed,
                    Basis::Z => e.logical_fail_x = failed,
                }
                out.push(e);
            }
            Step::Ccz { regs, model } => {
                out.push(self.ccz_gadget(regs, *model)?);
                if self.setup.auto_ec {
                    for r in regs {
                        out.push(self.ec_round(r)?);
                    }
                }
            }
            Step::Check { reg, bases } => out.push(self.check(reg, bases)?),
        }
        Ok(out)
    }
}

/// Aggregated outcome of [`run_protocol`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSummary {
    pub trials: u64,
    pub failures: u64,
    pub failures_x: u64,
    pub failures_z: u64,
    pub metacode_failures: u64,
    pub mean_final_residual: f64,
}

impl ProtocolSummary {
    pub fn failure_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.failures as f64 / self.trials as f64
        }
    }
}

/// Monte-Carlo over `trials` independent runs of `script`; trial `t` draws
/// from substream `(noise.seed, 0, t)`. A trial fails if any check or
/// measurement deviates from the noiseless run of the same script.
pub fn run_protocol(
    setup: &ProtocolSetup,
    script: &[Step],
    noise: NoiseModel,
    trials: u64,
) -> Result<(Vec<TraceEntry>, ProtocolSummary), ProtocolError> {
    let mut rows = Vec::new();
    let mut summary = ProtocolSummary { trials, ..Default::default() };
    let mut residual_total = 0usize;
    let mut reference = Simulator::new(setup, NoiseModel::noiseless(), substream(noise.seed, 1, 0));
    for step in script {
        reference.run_step(step)?;
    }
    for t in 0..trials {
        let mut sim = Simulator::new(setup, noise, substream(noise.seed, 0, t)).with_reference(reference.outcomes.clone());
        let (mut fx, mut fz, mut meta) = (false, false, false);
        let mut last_residual = 0;
        for (k, step) in script.iter().enumerate() {
            for mut e in sim.run_step(step)? {
                e.trial = t;
                e.script_step = k;
                fx |= e.logical_fail_x;
                fz |= e.logical_fail_z;
                meta |= e.metacode_fail;
                last_residual = e.residual_weight;
                rows.push(e);
            }
        }
        residual_total += last_residual;
        summary.failures += u64::from(fx || fz);
        summary.failures_x += u64::from(fx);
        summary.failures_z += u64::from(fz);
        summary.metacode_failures += u64::from(meta);
    }
    summary.mean_final_residual = if trials == 0 { 0.0 } else { residual_total as f64 / trials as f64 };
    Ok((rows, summary))
}

/// Runs `script` once, noiselessly, with the given faults injected; the
/// final boundary is applied.
pub fn run_with_faults<'a>(setup: &'a ProtocolSetup, script: &[Step], faults: Vec<Fault>) -> Result<Simulator<'a>, ProtocolError> {
    let mut sim = Simulator::new(setup, NoiseModel::noiseless(), substream(0, 0, 0)).with_faults(faults);
    for step in script {
        sim.run_step(step)?;
    }
    sim.finish();
    Ok(sim)
}

/// Every `(boundary, register, qubit, Pauli)` location visited by `script`.
pub fn fault_locations(setup: &ProtocolSetup, script: &[Step]) -> Result<Vec<Fault>, ProtocolError> {
    let mut sim = Simulator::new(setup, NoiseModel::noiseless(), substream(0, 0, 0));
    for step in script {
        sim.run_step(step)?;
    }
    sim.finish();
    let mut out = Vec::new();
    for (b, live) in sim.boundary_log.iter().enumerate() {
        for (name, n) in live {
            for q in 0..*n {
                for pauli in [Pauli::X, Pauli::Y, Pauli::Z] {
                    out.push(Fault { boundary: b, register: name.clone(), qubit: q, pauli });
                }
            }
        }
    }
    Ok(out)
}

fn reduced(ctx: &CodeContext, e: &BitVec, basis: Basis) -> BitVec {
    let dec = match basis {
        Basis::X => &ctx.dec_x,
        Basis::Z => &ctx.dec_z,
    };
    BitVec::concat(&[&dec.checks().mul_vec(e), &ctx.logical_flips(e, basis)])
}

/// Syndromes and logical parities of every readout and of the frames of
/// `out`. Under [`Simulator::raw`] this is linear in the injected faults, and
/// every decoder decision of a full run depends on the faults only through it.
pub fn fault_signature(sim: &Simulator, out: &str) -> Result<BitVec, ProtocolError> {
    let mut parts = Vec::new();
    for r in &sim.readouts {
        let ctx = sim.setup.codes.get(&r.code).ok_or_else(|| ProtocolError::UnknownCode(r.code.clone()))?;
        parts.push(reduced(ctx, &r.bits, r.basis));
    }
    let reg = sim.register(out)?;
    parts.push(reduced(&reg.ctx, &reg.frame.x, Basis::X));
    parts.push(reduced(&reg.ctx, &reg.frame.z, Basis::Z));
    Ok(BitVec::concat(&parts.iter().collect::<Vec<_>>()))
}

/// Outcome of [`exhaustive_fault_scan`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultScanReport {
    pub locations: usize,
    /// Distinct nonzero single-fault signatures.
    pub single_classes: usize,
    /// Distinct nonzero pair signatures simulated.
    pub pair_classes: usize,
    pub single_failures: Vec<Fault>,
    pub pair_failures: Vec<(Fault, Fault)>,
}

impl FaultScanReport {
    pub fn passed(&self) -> bool {
        self.single_failures.is_empty() && self.pair_failures.is_empty()
    }
}

/// Injects every single fault and, for `order >= 2`, every pair of faults
/// over [`fault_locations`], then compares the logical state of `out` after
/// ideal decoding with the fault-free run. Faults are grouped by
/// [`fault_signature`] so each distinct linear effect is simulated once.
pub fn exhaustive_fault_scan(setup: &ProtocolSetup, script: &[Step], out: &str, order: usize) -> Result<FaultScanReport, ProtocolError> {
    let baseline = run_with_faults(setup, script, vec![])?.logical_errors(out)?;
    let fails = |faults: Vec<Fault>| -> Result<bool, ProtocolError> {
        Ok(run_with_faults(setup, script, faults)?.logical_errors(out)? != baseline)
    };
    let raw_signature = |faults: Vec<Fault>| -> Result<BitVec, ProtocolError> {
        let mut sim = Simulator::new(setup, NoiseModel::noiseless(), substream(0, 0, 0)).raw().with_faults(faults);
        for step in script {
            sim.run_step(step)?;
        }
        sim.finish();
        fault_signature(&sim, out)
    };
    let zero = raw_signature(vec![])?;
    let locations = fault_locations(setup, script)?;
    let mut classes: HashMap<BitVec, Fault> = HashMap::new();
    for f in &locations {
        let d = raw_signature(vec![f.clone()])?.xor(&zero);
        if !d.is_zero() {
            classes.entry(d).or_insert_with(|| f.clone());
        }
    }
    let mut reps: Vec<(BitVec, Fault)> = classes.into_iter().collect();
    reps.sort_by(|a, b| a.0.cmp(&b.0));
    let mut report = FaultScanReport { locations: locations.len(), single_classes: reps.len(), ..Default::default() };
    for (_, f) in &reps {
        if fails(vec![f.clone()])? {
            report.single_failures.push(f.clone());
        }
    }
    if order >= 2 {
        let mut seen: std::collections::HashSet<BitVec> = reps.iter().map(|r| r.0.clone()).collect();
        for i in 0..reps.len() {
            for j in i + 1..reps.len() {
                let d = reps[i].0.xor(&reps[j].0);
                if d.is_zero() || !seen.insert(d) {
                    continue;
                }
                report.pair_classes += 1;
                if fails(vec![reps[i].1.clone(), reps[j].1.clone()])? {
                    report.pair_failures.push((reps[i].1.clone(), reps[j].1.clone()));
                }
            }
        }
    }
    Ok(report)
}

/// Trace rows as CSV with the documented header.
pub fn trace_csv(rows: &[TraceEntry]) -> String {
    let mut s = String::from("trial,script_step,gadget,r_in,s_during,metacode_fail,logical_fail_X,logical_fail_Z,residual_weight\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.trial,
            r.script_step,
            r.gadget,
            r.r_in,
            r.s_during,
            u8::from(r.metacode_fail),
            u8::from(r.logical_fail_x),
            u8::from(r.logical_fail_z),
            r.residual_weight
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgp::qg_family;
    use crate::homomorphic::{cnot_schedule, layer_embedding};

    fn setup(l: usize) -> ProtocolSetup {
        let (q, qg) = qg_family(l).unwrap();
        let sched = cnot_schedule(&layer_embedding(&qg, &q, 0).unwrap()).unwrap();
        let mut s = ProtocolSetup::default();
        s.add_code(CodeContext::new("Q", q, Budgets::default()));
        s.add_code(CodeContext::new("QG", qg, Budgets::default()));
        s.schedules.insert(("QG".into(), "Q".into()), sched);
        s
    }

    fn round_trip(lx: Vec<usize>, lz: Vec<usize>) -> Vec<Step> {
        vec![
            Step::PrepData { reg: "src".into(), code: "Q".into(), logical_x: lx, logical_z: lz },
            Step::PrepPlus3d { reg: "g".into(), code: "QG".into() },
            Step::PrepZero2d { reg: "a1".into(), code: "Q".into() },
            Step::Expand { src: "src".into(), dst: "g".into(), anc: "a1".into() },
            Step::PrepPlus2d { reg: "out".into(), code: "Q".into() },
            Step::PrepZero2d { reg: "a2".into(), code: "Q".into() },
            Step::Contract { src: "g".into(), dst: "out".into(), anc: "a2".into() },
        ]
    }

    #[test]
    fn transversal_cnot_rules() {
        let s = setup(3);
        let mut sim = Simulator::new(&s, NoiseModel::noiseless(), substream(0, 0, 0));
        sim.prep_data("c", "Q", &[], &[]).unwrap();
        sim.prep_data("t", "Q", &[], &[]).unwrap();
        sim.regs[0].frame.x.flip(5);
        sim.regs[1].frame.z.flip(2);
        sim.transversal_cnot("c", "t").unwrap();
        assert!(sim.regs[1].frame.x.get(5) && sim.regs[0].frame.x.get(5));
        assert!(sim.regs[0].frame.z.get(2) && sim.regs[1].frame.z.get(2));
        sim.transversal_cnot("c", "t").unwrap();
        assert_eq!(sim.regs[1].frame.x.weight(), 0);
        assert_eq!(sim.regs[0].frame.z.weight(), 0);
    }

    #[test]
    fn homomorphic_cnot_maps_logicals() {
        let s = setup(3);
        let mut sim = Simulator::new(&s, NoiseModel::noiseless(), substream(0, 0, 0));
        sim.prep_data("g", "QG", &[1], &[]).unwrap();
        sim.prep_data("t", "Q", &[], &[]).unwrap();
        sim.homomorphic_cnot("g", "t").unwrap();
        let t = sim.register("t").unwrap();
        assert!(t.ctx.code.h_z.mul_vec(&t.frame.x).is_zero());
        assert_eq!(t.ctx.logical_flips(&t.frame.x, Basis::X).support(), vec![1]);
    }

    #[test]
    fn noiseless_round_trip_all_logical_frames() {
        let s = setup(3);
        for mask in 0..16usize {
            let lx: Vec<usize> = (0..2).filter(|i| mask >> i & 1 == 1).collect();
            let lz: Vec<usize> = (0..2).filter(|i| mask >> (i + 2) & 1 == 1).collect();
            let sim = run_with_faults(&s, &round_trip(lx.clone(), lz.clone()), vec![]).unwrap();
            let (fx, fz) = sim.logical_errors("out").unwrap();
            assert_eq!(fx.support(), lx);
            assert_eq!(fz.support(), lz);
        }
    }

    #[test]
    fn preconditions_enforced() {
        let s = setup(3);
        let mut sim = Simulator::new(&s, NoiseModel::noiseless(), substream(0, 0, 0));
        sim.prep_data("src", "Q", &[], &[]).unwrap();
        sim.prep_plus_3d("g", "QG").unwrap();
        sim.prep_plus_2d("a", "Q").unwrap();
        assert!(matches!(sim.expand("src", "g", "a"), Err(ProtocolError::WrongState { .. })));
        sim.prep_zero_2d("a", "Q").unwrap();
        sim.expand("src", "g", "a").unwrap();
        assert!(matches!(sim.ec_round("src"), Err(ProtocolError::Consumed(_))));
    }

    #[test]
    fn zero_noise_scripts_never_fail() {
        let s = setup(2);
        let mut script = round_trip(vec![], vec![]);
        script.push(Step::Ec { reg: "out".into(), rounds: 3 });
        script.push(Step::Check { reg: "out".into(), bases: vec![] });
        let noise = NoiseModel::noiseless();
        let (rows, summary) = run_protocol(&s, &script, noise, 5).unwrap();
        assert_eq!(summary.failures, 0);
        assert!(rows.iter().all(|r| !r.metacode_fail));
        assert!(trace_csv(&rows).starts_with("trial,script_step,gadget,r_in,s_during,metacode_fail,logical_fail_X"));
    }

    #[test]
    fn carried_logicals_are_not_failures() {
        let s = setup(2);
        let mut script = round_trip(vec![0], vec![1]);
        script.push(Step::Check { reg: "out".into(), bases: vec![] });
        let (_, clean) = run_protocol(&s, &script, NoiseModel::noiseless(), 5).unwrap();
        assert_eq!(clean.failures, 0);
        let noisy = NoiseModel::new(0.05, 0.05, 3).unwrap();
        let (_, carried) = run_protocol(&s, &script, noisy, 200).unwrap();
        let mut bare = round_trip(vec![], vec![]);
        bare.push(Step::Check { reg: "out".into(), bases: vec![] });
        let (_, empty) = run_protocol(&s, &bare, noisy, 200).unwrap();
        assert!(carried.failures > 0);
        assert_eq!(carried.failures, empty.failures);
    }

    #[test]
    fn deferred_basis_excluded_from_3d_residual() {
        let s = setup(2);
        let (q, qg) = (&s.codes["Q"], &s.codes["QG"]);
        let mut f = PauliFrame::zeros(qg.n());
        f.z.set(0, true);
        assert_eq!(qg.residual_weight(&f), 0);
        f.x.set(0, true);
        assert_eq!(qg.residual_weight(&f), 1);
        let mut g = PauliFrame::zeros(q.n());
        g.z.set(0, true);
        assert_eq!(q.residual_weight(&g), 1);
    }

    #[test]
    fn ec_round_noiseless_noop() {
        let s = setup(2);
        let mut sim = Simulator::new(&s, NoiseModel::noiseless(), substream(0, 0, 0));
        sim.prep_data("d", "QG", &[], &[]).unwrap();
        let e = sim.ec_round("d").unwrap();
        assert_eq!(e.residual_weight, 0);
    }

    #[test]
    fn measurement_flags_logical_flip() {
        let s = setup(3);
        let mut sim = Simulator::new(&s, NoiseModel::noiseless(), substream(0, 0, 0));
        sim.prep_data("d", "Q", &[], &[0]).unwrap();
        let m = sim.transversal_measure("d", Basis::X).unwrap();
        assert_eq!(m.flips.support(), vec![0]);
    }

    #[test]
    fn ccz_byproducts() {
        let mut s = setup(3);
        s.ccz = Some(Arc::new(CczContext::new(vec![[1, 2, 3], [1, 4, 5], [0, 0, 0]])));
        let mut sim = Simulator::new(&s, NoiseModel::noiseless(), substream(0, 0, 0));
        for r in ["a", "b", "c"] {
            sim.prep_data(r, "Q", &[], &[]).unwrap();
        }
        let regs = ["a".to_string(), "b".to_string(), "c".to_string()];
        let e = sim.ccz_gadget(&regs, ByproductModel::WorstCase).unwrap();
        assert_eq!(e.residual_weight, 0);
        sim.regs[0].frame.x.flip(1);
        sim.ccz_gadget(&regs, ByproductModel::WorstCase).unwrap();
        assert_eq!(sim.regs[1].frame.z.support(), vec![2, 4]);
        assert_eq!(sim.regs[2].frame.z.support(), vec![3, 5]);
    }

    fn small_setup(l: usize) -> ProtocolSetup {
        let q = crate::hgp::toric(l).unwrap();
        let qg = crate::hgp::build_QG(&q, &crate::graphs::ring(2).unwrap()).unwrap();
        let sched = cnot_schedule(&layer_embedding(&qg, &q, 0).unwrap()).unwrap();
        let mut s = ProtocolSetup::default();
        s.add_code(CodeContext::new("Q", q, Budgets::default()));
        s.add_code(CodeContext::new("QG", qg, Budgets::default()));
        s.schedules.insert(("QG".into(), "Q".into()), sched);
        s
    }

    #[test]
    fn fault_scan_distance_three() {
        let s = small_setup(3);
        let script = round_trip(vec![1], vec![0]);
        let single = exhaustive_fault_scan(&s, &script, "out", 1).unwrap();
        assert!(single.passed(), "{:?}", single.single_failures);
        assert!(single.single_classes > 0 && single.single_classes < single.locations);
        let double = exhaustive_fault_scan(&s, &script, "out", 2).unwrap();
        assert!(!double.pair_failures.is_empty());
    }

    #[test]
    fn raw_signature_is_linear() {
        let s = small_setup(3);
        let script = round_trip(vec![], vec![1]);
        let locs = fault_locations(&s, &script).unwrap();
        let sig = |faults: Vec<Fault>| {
            let mut sim = Simulator::new(&s, NoiseModel::noiseless(), substream(0, 0, 0)).raw().with_faults(faults);
            for step in &script {
                sim.run_step(step).unwrap();
            }
            sim.finish();
            fault_signature(&sim, "out").unwrap()
        };
        let zero = sig(vec![]);
        let mut rng = substream(3, 0, 0);
        for _ in 0..50 {
            let a = locs[rng.gen_range(0..locs.len())].clone();
            let b = locs[rng.gen_range(0..locs.len())].clone();
            let lhs = sig(vec![a.clone(), b.clone()]);
            let rhs = sig(vec![a]).xor(&sig(vec![b])).xor(&zero);
            assert_eq!(lhs, rhs);
        }
    }
}
