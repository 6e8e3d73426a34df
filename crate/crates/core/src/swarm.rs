//! UAV entities, 3-D deployment, and the time-varying communication topology.
//!
//! Physical link formation uses true positions; defense logic elsewhere only
//! ever sees reported or measured quantities.

use crate::config::{ConfigError, ScenarioConfig};
use crate::Vec3;
use rand::Rng;
use std::collections::BTreeSet;

/// Role of a swarm member.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Legitimate,
    Insider,
}

/// A UAV's true kinematics, GPS-reported position, role, energy, and current
/// defense intensity.
#[derive(Debug, Clone)]
pub struct UavState {
    pub id: usize,
    /// Ground-truth position, meters.
    pub pos_true: Vec3,
    /// GPS-reported position, meters. Equals `pos_true` unless spoofed.
    pub pos_gps: Vec3,
    pub velocity: Vec3,
    pub role: Role,
    /// Remaining energy, joules. Non-increasing over a run.
    pub energy: f64,
    /// Collaborative defense intensity p: cooperative communication range,
    /// meters, clamped to [0, r_sense].
    pub cdi: f64,
    pub admitted: bool,
}

/// Communication and sensing link structure at one slot.
///
/// Edges are stored as unordered `(i, j)` pairs with `i < j`; a pair is
/// linked iff the Euclidean distance between true positions is at most the
/// radius (boundary counts as connected).
#[derive(Debug, Clone, Default)]
pub struct SwarmTopology {
    pub comm_edges: BTreeSet<(usize, usize)>,
    pub sense_edges: BTreeSet<(usize, usize)>,
    pub epoch: u64,
}

impl SwarmTopology {
    /// Sense-neighbor ids of `id`, ascending.
    pub fn sense_neighbors(&self, id: usize, n: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for j in 0..n {
            if j != id && self.sense_edges.contains(&key(id, j)) {
                out.push(j);
            }
        }
        out
    }

    pub fn sense_degree(&self, id: usize, n: usize) -> usize {
        (0..n)
            .filter(|&j| j != id && self.sense_edges.contains(&key(id, j)))
            .count()
    }
}

fn key(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

/// Place exactly `n_uavs` UAVs uniformly i.i.d. in the region (a Poisson
/// point process conditioned on its count is uniform) and assign
/// `floor(insider_fraction * n_uavs)` insiders by seeded draw.
pub fn deploy_ppp<R: Rng>(config: &ScenarioConfig, rng: &mut R) -> Result<Vec<UavState>, ConfigError> {
    let s = &config.swarm;
    if s.region.iter().any(|&d| d <= 0.0) {
        return Err(ConfigError::Invalid(
            "deployment region must have positive volume".into(),
        ));
    }
    let mut uavs = Vec::with_capacity(s.n_uavs);
    for id in 0..s.n_uavs {
        let pos = Vec3::new(
            rng.gen_range(0.0..s.region[0]),
            rng.gen_range(0.0..s.region[1]),
            rng.gen_range(0.0..s.region[2]),
        );
        uavs.push(UavState {
            id,
            pos_true: pos,
            pos_gps: pos,
            velocity: Vec3::zeros(),
            role: Role::Legitimate,
            energy: 1.0e5,
            cdi: 0.0,
            admitted: true,
        });
    }
    // Seeded partial Fisher-Yates picks the insider set.
    let n_insiders = (s.insider_fraction * s.n_uavs as f64).floor() as usize;
    let mut ids: Vec<usize> = (0..s.n_uavs).collect();
    for k in 0..n_insiders {
        let pick = rng.gen_range(k..ids.len());
        ids.swap(k, pick);
        uavs[ids[k]].role = Role::Insider;
    }
    Ok(uavs)
}

/// Recompute both edge sets from true positions at the current slot.
pub fn update_topology(uavs: &[UavState], r_comm: f64, r_sense: f64, epoch: u64) -> SwarmTopology {
    let mut topo = SwarmTopology {
        epoch,
        ..Default::default()
    };
    for i in 0..uavs.len() {
        for j in (i + 1)..uavs.len() {
            let d = (uavs[i].pos_true - uavs[j].pos_true).norm();
            if d <= r_sense {
                topo.sense_edges.insert((i, j));
                if d <= r_comm {
                    topo.comm_edges.insert((i, j));
                }
            }
        }
    }
    topo
}
