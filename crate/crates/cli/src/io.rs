//! Trajectory CSV (`trajectory/1`) and small file helpers.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use rrn::policy::PolicyMode;
use rrn::rollout::Trajectory;
use rrn::world::{Point, Pose};

pub const TRAJECTORY_FORMAT: &str = "trajectory/1";
pub const TRAJECTORY_HEADER: &str = "t,x,y,theta,v_exec,omega_exec,v_prior,omega_prior,mu_dv,mu_dw,var_dv,var_dw,epsilon,used_prior_only,reward";

/// One control step. `x, y, theta` is the pose the action was chosen from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: usize,
    pub pose: Pose,
    pub v_exec: f64,
    pub omega_exec: f64,
    pub v_prior: f64,
    pub omega_prior: f64,
    /// Residual mean; RRN and sRRN only.
    pub mu: Option<[f64; 2]>,
    /// MC-dropout variance and switch probability; sRRN only.
    pub var: Option<[f64; 2]>,
    pub epsilon: Option<f64>,
    pub used_prior_only: bool,
    pub reward: f64,
}

impl TrajectoryRow {
    /// Residual actually added to the prior this step.
    pub fn applied_residual(&self) -> [f64; 2] {
        match self.mu {
            Some(mu) if !self.used_prior_only => mu,
            _ => [0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryFile {
    pub mode: PolicyMode,
    pub goal: Point,
    pub final_pose: Pose,
    pub rows: Vec<TrajectoryRow>,
}

impl TrajectoryFile {
    pub fn from_trajectory(mode: PolicyMode, traj: &Trajectory) -> Self {
        let rows = traj
            .steps
            .iter()
            .map(|s| {
                let d = &s.decision;
                let srrn = mode == PolicyMode::Srrn;
                TrajectoryRow {
                    t: s.t,
                    pose: s.pose,
                    v_exec: d.action.v,
                    omega_exec: d.action.omega,
                    v_prior: d.prior.v,
                    omega_prior: d.prior.omega,
                    mu: match mode {
                        PolicyMode::Rrn => Some(d.applied_residual),
                        PolicyMode::Srrn => d.estimate.map(|e| e.mean),
                        _ => None,
                    },
                    var: d.estimate.filter(|_| srrn).map(|e| e.variance),
                    epsilon: d.switch.filter(|_| srrn).map(|sw| sw.epsilon),
                    used_prior_only: match mode {
                        PolicyMode::PriorOnly => true,
                        PolicyMode::Srrn => d.switch.is_some_and(|sw| sw.used_prior_only),
                        _ => false,
                    },
                    reward: s.reward,
                }
            })
            .collect();
        Self {
            mode,
            goal: traj.goal,
            final_pose: traj.final_pose,
            rows,
        }
    }

    pub fn to_csv(&self) -> String {
        let f = &self.final_pose;
        let mut out = format!(
            "# {TRAJECTORY_FORMAT} mode={} goal={},{} final={},{},{}\n{TRAJECTORY_HEADER}\n",
            self.mode, self.goal.x, self.goal.y, f.x, f.y, f.theta
        );
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.t,
                r.pose.x,
                r.pose.y,
                r.pose.theta,
                r.v_exec,
                r.omega_exec,
                r.v_prior,
                r.omega_prior,
                opt(r.mu.map(|m| m[0])),
                opt(r.mu.map(|m| m[1])),
                opt(r.var.map(|m| m[0])),
                opt(r.var.map(|m| m[1])),
                opt(r.epsilon),
                u8::from(r.used_prior_only),
                r.reward
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let meta = lines.next().filter(|l| !l.trim().is_empty()).ok_or_else(|| anyhow!("line 1: empty trajectory file"))?;
        let (mode, goal, final_pose) = parse_meta(meta).map_err(|e| anyhow!("line 1: {e}"))?;
        match lines.next() {
            Some(h) if h == TRAJECTORY_HEADER => {}
            Some(_) => bail!("line 2: expected header {TRAJECTORY_HEADER:?}"),
            None => bail!("line 2: missing header"),
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let line_no = i + 3;
            if line.is_empty() {
                continue;
            }
            rows.push(parse_row(line).map_err(|e| anyhow!("line {line_no}: {e}"))?);
        }
        if rows.is_empty() {
            bail!("trajectory file has no steps");
        }
        Ok(Self {
            mode,
            goal,
            final_pose,
            rows,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_csv(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Poses visited, final pose included.
    pub fn poses(&self) -> Vec<Pose> {
        self.rows.iter().map(|r| r.pose).chain(std::iter::once(self.final_pose)).collect()
    }
}

fn parse_meta(line: &str) -> Result<(PolicyMode, Point, Pose)> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some("#") || parts.next() != Some(TRAJECTORY_FORMAT) {
        bail!("expected a `# {TRAJECTORY_FORMAT}` line");
    }
    let (mut mode, mut goal, mut fin) = (None, None, None);
    for part in parts {
        let (key, value) = part.split_once('=').ok_or_else(|| anyhow!("malformed field {part:?}"))?;
        match key {
            "mode" => mode = Some(value.parse::<PolicyMode>()?),
            "goal" => goal = Some(floats(value, 2)?),
            "final" => fin = Some(floats(value, 3)?),
            _ => bail!("unknown field {key:?}"),
        }
    }
    let (mode, goal, fin) = match (mode, goal, fin) {
        (Some(m), Some(g), Some(f)) => (m, g, f),
        _ => bail!("metadata needs mode, goal and final"),
    };
    Ok((mode, Point::new(goal[0], goal[1]), Pose::new(fin[0], fin[1], fin[2])))
}

fn floats(value: &str, n: usize) -> Result<Vec<f64>> {
    let v: Vec<f64> = value
        .split(',')
        .map(|x| x.parse::<f64>().map_err(|_| anyhow!("bad number {x:?}")))
        .collect::<Result<_>>()?;
    if v.len() != n {
        bail!("expected {n} numbers in {value:?}");
    }
    Ok(v)
}

fn parse_row(line: &str) -> Result<TrajectoryRow> {
    let f: Vec<&str> = line.split(',').collect();
    if f.len() != 15 {
        bail!("expected 15 fields, found {}", f.len());
    }
    const NAMES: [&str; 15] = [
        "t", "x", "y", "theta", "v_exec", "omega_exec", "v_prior", "omega_prior", "mu_dv", "mu_dw", "var_dv", "var_dw", "epsilon",
        "used_prior_only", "reward",
    ];
    let num = |i: usize| f[i].parse::<f64>().map_err(|_| anyhow!("bad {} value {:?}", NAMES[i], f[i]));
    let opt = |i: usize| if f[i].is_empty() { Ok(None) } else { num(i).map(Some) };
    let pair = |i: usize| -> Result<Option<[f64; 2]>> {
        match (opt(i)?, opt(i + 1)?) {
            (Some(a), Some(b)) => Ok(Some([a, b])),
            (None, None) => Ok(None),
            _ => bail!("{} and {} must both be set or both empty", NAMES[i], NAMES[i + 1]),
        }
    };
    Ok(TrajectoryRow {
        t: f[0].parse().map_err(|_| anyhow!("bad t value {:?}", f[0]))?,
        pose: Pose::new(num(1)?, num(2)?, num(3)?),
        v_exec: num(4)?,
        omega_exec: num(5)?,
        v_prior: num(6)?,
        omega_prior: num(7)?,
        mu: pair(8)?,
        var: pair(10)?,
        epsilon: opt(12)?,
        used_prior_only: match f[13] {
            "0" => false,
            "1" => true,
            other => bail!("bad used_prior_only value {other:?}"),
        },
        reward: num(14)?,
    })
}

/// Write `contents` to `path`, creating parent directories.
pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}
