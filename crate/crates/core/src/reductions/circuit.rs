use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::game::{count_in, payoff, ActionGraphGame, GameBuilder, Payoff};
use crate::StrategyId;

use super::copy::{sparsify_per_edge, CopyGadget};

/// A gate; operands are indices of earlier gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gate {
    Input,
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
}

impl Gate {
    fn operands(&self) -> Vec<usize> {
        match *self {
            Gate::Input => vec![],
            Gate::Not(a) => vec![a],
            Gate::And(a, b) | Gate::Or(a, b) => vec![a, b],
        }
    }

    fn eval(&self, vals: &[bool]) -> bool {
        match *self {
            Gate::Input => unreachable!("inputs have no operands"),
            Gate::Not(_) => !vals[0],
            Gate::And(..) => vals[0] && vals[1],
            Gate::Or(..) => vals[0] || vals[1],
        }
    }
}

/// A boolean circuit in topological order with a designated output gate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BooleanCircuit {
    gates: Vec<Gate>,
    output: usize,
}

impl BooleanCircuit {
    /// Checks that operands precede their gate and that every gate has at
    /// most three wires (inputs plus uses; a repeated operand counts twice).
    pub fn new(gates: Vec<Gate>, output: usize) -> Result<Self> {
        if output >= gates.len() {
            return Err(Error::InvalidReduction(format!("output gate {output} does not exist")));
        }
        let mut degree = vec![0usize; gates.len()];
        for (i, g) in gates.iter().enumerate() {
            for a in g.operands() {
                if a >= i {
                    return Err(Error::InvalidReduction(format!("gate {i} reads gate {a}, which is not earlier")));
                }
                degree[a] += 1;
                degree[i] += 1;
            }
        }
        if let Some(i) = (0..gates.len()).find(|&i| degree[i] > 3) {
            return Err(Error::InvalidReduction(format!("gate {i} has {} wires", degree[i])));
        }
        Ok(BooleanCircuit { gates, output })
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn output(&self) -> usize {
        self.output
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Input gate ids, ascending.
    pub fn inputs(&self) -> Vec<usize> {
        (0..self.gates.len()).filter(|&i| self.gates[i] == Gate::Input).collect()
    }

    /// Values of all gates given one value per input gate (ascending id).
    pub fn evaluate(&self, inputs: &[bool]) -> Vec<bool> {
        let mut vals = Vec::with_capacity(self.gates.len());
        let mut next = inputs.iter();
        for g in &self.gates {
            let v = match g {
                Gate::Input => *next.next().expect("one value per input gate"),
                _ => g.eval(&g.operands().iter().map(|&a| vals[a]).collect::<Vec<bool>>()),
            };
            vals.push(v);
        }
        vals
    }

    pub fn is_satisfiable(&self) -> bool {
        let k = self.inputs().len();
        (0..1u64 << k).any(|mask| {
            let inputs: Vec<bool> = (0..k).map(|b| mask >> b & 1 == 1).collect();
            self.evaluate(&inputs)[self.output]
        })
    }
}

/// Strategy ids of the circuit game: gate `i` owns `f_i = 2i`, `t_i = 2i + 1`;
/// the pennies pair follows.
fn labels(c: &BooleanCircuit) -> Vec<alloc::string::String> {
    let mut out: Vec<_> = (0..c.len()).flat_map(|i| [format!("f{i}"), format!("t{i}")]).collect();
    out.extend(["fp1", "tp1", "fp2", "tp2"].map(alloc::string::String::from));
    out
}

fn edges(c: &BooleanCircuit, b: &mut GameBuilder) {
    let n = c.len();
    for (j, g) in c.gates.iter().enumerate() {
        for a in g.operands() {
            b.add_edge(2 * a, 2 * j).add_edge(2 * a, 2 * j + 1);
        }
    }
    let (fo, p1, p2) = (2 * c.output, 2 * n, 2 * n + 2);
    for s in [p1, p1 + 1, p2, p2 + 1] {
        b.add_edge(fo, s);
    }
    b.add_edge(p1, p2).add_edge(p1, p2 + 1).add_edge(p2, p1).add_edge(p2, p1 + 1);
}

/// Payoff of strategy `s` in the circuit game. Counts include the deviating
/// agent itself. A gate whose operand is read from a pair with two or more
/// agents on `f` gets 0; with `penalty`, an overfull own pair pays -1.
fn circuit_payoff(c: &BooleanCircuit, s: StrategyId, scope: &[StrategyId], counts: &[u32], penalty: bool) -> Payoff {
    let full = |x: StrategyId| count_in(scope, counts, x) + u32::from(x == s && scope.binary_search(&x).is_err());
    if penalty && full(s & !1) + full(s | 1) > 1 {
        return payoff(-1);
    }
    let n = c.len();
    let x = s / 2;
    let (p1, p2) = (2 * n, 2 * n + 2);
    if x < n {
        let g = c.gates[x];
        if g == Gate::Input {
            return payoff(0);
        }
        let mut vals = Vec::new();
        for a in g.operands() {
            match full(2 * a) {
                0 => vals.push(true),
                1 => vals.push(false),
                _ => return payoff(0),
            }
        }
        payoff(i64::from(g.eval(&vals) == (s % 2 == 1)))
    } else if x == n {
        if full(2 * c.output) == 0 {
            payoff(0)
        } else {
            payoff(i64::from(full(p1) == full(p2)))
        }
    } else {
        payoff(i64::from(full(p1) != full(p2)))
    }
}

/// One agent per gate plus the pennies pair `p1`, `p2`. A gate agent is paid
/// 1 for announcing its gate's value given the announced operands (`f_i`
/// occupied means false); inputs are indifferent. Once the output reads
/// false, `p1` wants to match `p2` and `p2` wants to mismatch, so a pure
/// equilibrium exists exactly when the circuit is satisfiable.
pub fn circuit_to_agg(c: &BooleanCircuit) -> Result<ActionGraphGame> {
    let n = c.len();
    let mut b = GameBuilder::new(labels(c));
    for i in 0..n + 2 {
        b.add_type(1, vec![2 * i, 2 * i + 1]);
    }
    edges(c, &mut b);
    b.build(|s, scope, counts| circuit_payoff(c, s, scope, counts, false))
}

/// [`circuit_to_agg`] with every outgoing edge moved to its own copy gadget;
/// the strategy graph becomes a forest.
pub fn circuit_to_tw1_agg(c: &BooleanCircuit) -> Result<(ActionGraphGame, Vec<CopyGadget>)> {
    sparsify_per_edge(&circuit_to_agg(c)?)
}

/// The circuit game with a single type: all `n + 2` agents may play every
/// strategy, each pair gets `f_x <-> t_x` and both self-loops, and a pair
/// holding two or more agents pays -1 on both its strategies.
pub fn circuit_to_symmetric_agg(c: &BooleanCircuit) -> Result<ActionGraphGame> {
    let n = c.len();
    let mut b = GameBuilder::new(labels(c));
    b.add_type(n as u32 + 2, (0..2 * n + 4).collect());
    edges(c, &mut b);
    for x in 0..n + 2 {
        let (f, t) = (2 * x, 2 * x + 1);
        b.add_edge(f, t).add_edge(t, f).add_edge(f, f).add_edge(t, t);
    }
    b.build(|s, scope, counts| circuit_payoff(c, s, scope, counts, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::enumerate_pure_nash;
    use crate::validate::validate;

    fn not_gate() -> BooleanCircuit {
        BooleanCircuit::new(vec![Gate::Input, Gate::Not(0)], 1).unwrap()
    }

    fn contradiction() -> BooleanCircuit {
        BooleanCircuit::new(vec![Gate::Input, Gate::Not(0), Gate::And(0, 1)], 2).unwrap()
    }

    #[test]
    fn circuit_basics() {
        assert!(not_gate().is_satisfiable());
        assert!(!contradiction().is_satisfiable());
        assert_eq!(contradiction().evaluate(&[true]), vec![true, false, false]);
        assert!(BooleanCircuit::new(vec![Gate::Not(0)], 0).is_err());
        assert!(BooleanCircuit::new(vec![Gate::Input], 1).is_err());
        let fan = vec![Gate::Input, Gate::Not(0), Gate::Not(0), Gate::Not(0), Gate::Not(0)];
        assert!(BooleanCircuit::new(fan, 4).is_err());
    }

    #[test]
    fn not_gate_equilibria_are_correct_evaluations() {
        let g = circuit_to_agg(&not_gate()).unwrap();
        assert!(validate(&g).is_valid());
        let ne = enumerate_pure_nash(&g).unwrap();
        assert!(!ne.is_empty());
        for p in &ne {
            // Input false (f0) forces the NOT gate to t1 and vice versa.
            assert_eq!(p[0] == 0, p[1] == 3);
            // The output reads true in every equilibrium.
            assert_eq!(p[0], 0);
        }
    }

    #[test]
    fn contradiction_has_no_pure_equilibrium() {
        let c = contradiction();
        assert!(enumerate_pure_nash(&circuit_to_agg(&c).unwrap()).unwrap().is_empty());
        assert!(enumerate_pure_nash(&circuit_to_symmetric_agg(&c).unwrap()).unwrap().is_empty());
    }

    #[test]
    fn tw1_version_is_a_forest() {
        for c in [not_gate(), contradiction()] {
            let (g, gadgets) = circuit_to_tw1_agg(&c).unwrap();
            assert!(validate(&g).is_valid());
            assert!(g.graph().is_forest());
            assert_eq!(g.agent_count(), c.len() + 2 + 2 * gadgets.len());
        }
        let (g, _) = circuit_to_tw1_agg(&not_gate()).unwrap();
        assert!(!enumerate_pure_nash(&g).unwrap().is_empty());
    }

    #[test]
    fn symmetric_penalty_and_loops() {
        let c = not_gate();
        let g = circuit_to_symmetric_agg(&c).unwrap();
        assert!(validate(&g).is_valid());
        assert_eq!(g.types().len(), 1);
        for s in 0..g.strategy_count() {
            assert!(g.graph().has_self_loop(s));
        }
        // f0 reads (f0, t0): two agents on the pair.
        assert_eq!(g.neighbors(0), &[0, 1]);
        assert_eq!(g.utility(0, &[1, 1]), Some(&payoff(-1)));
        assert_eq!(g.utility(0, &[2, 0]), Some(&payoff(-1)));
        assert_eq!(g.utility(0, &[1, 0]), Some(&payoff(0)));
        // Pure equilibria are the asymmetric ones up to relabelling agents.
        let sym = enumerate_pure_nash(&g).unwrap();
        let mut sorted: Vec<Vec<usize>> = sym
            .iter()
            .map(|p| {
                let mut q = p.clone();
                q.sort_unstable();
                q
            })
            .collect();
        sorted.sort();
        sorted.dedup();
        let asym = enumerate_pure_nash(&circuit_to_agg(&c).unwrap()).unwrap();
        assert_eq!(sorted, asym);
    }
}
