use alloc::vec;
use alloc::vec::Vec;

use super::SystolicError;
use crate::bits::BitVec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LineControl {
    /// First string of the stream: only fill the memories.
    Load,
    Sum,
    Keep,
}

/// `H(a, b)` for one consecutive pair of the stream, with the iteration at
/// which each output bit left the line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HLineOutput {
    pub value: BitVec,
    pub emitted_at: Vec<u64>,
}

/// Streams `x(1), x(2), ...` through a systolic line and returns
/// `H(x(1), x(2)), H(x(2), x(3)), ...` where `H(a, b) = a + b` if
/// `a_1 = b_1` and `b` otherwise.
///
/// PE `j` holds bit `j` of the previous string. String `s` reaches PE `j` at
/// iteration `s + j + 1`; PE 0 compares the leading bits and its decision
/// travels right one PE per iteration, so outputs leave staggered.
pub fn h_line(stream: &[BitVec]) -> Result<Vec<HLineOutput>, SystolicError> {
    let Some(first) = stream.first() else { return Ok(Vec::new()) };
    let n = first.len();
    if let Some(bad) = stream.iter().find(|s| s.len() != n) {
        return Err(SystolicError::LengthMismatch { a: n, b: bad.len() });
    }
    if n == 0 {
        return Ok(vec![HLineOutput { value: BitVec::zeros(0), emitted_at: Vec::new() }; stream.len() - 1]);
    }
    let mut memory = vec![false; n];
    let mut control: Vec<Option<LineControl>> = vec![None; n];
    let mut outputs: Vec<HLineOutput> = (1..stream.len())
        .map(|_| HLineOutput { value: BitVec::zeros(n), emitted_at: vec![0; n] })
        .collect();
    let last = (stream.len() - 1 + n - 1) as u64 + 1;
    for t in 1..=last {
        let prev = control.clone();
        for j in 0..n {
            let Some(s) = (t as usize).checked_sub(j + 1).filter(|&s| s < stream.len()) else {
                control[j] = None;
                continue;
            };
            let x = stream[s].get(j);
            let c = if j == 0 {
                if s == 0 {
                    LineControl::Load
                } else if memory[0] == x {
                    LineControl::Sum
                } else {
                    LineControl::Keep
                }
            } else {
                prev[j - 1].expect("control arrives with the data")
            };
            match c {
                LineControl::Load => {}
                LineControl::Sum | LineControl::Keep => {
                    let out = if c == LineControl::Sum { memory[j] ^ x } else { x };
                    outputs[s - 1].value.set(j, out);
                    outputs[s - 1].emitted_at[j] = t;
                }
            }
            memory[j] = x;
            control[j] = Some(c);
        }
    }
    Ok(outputs)
}

/// `H(a, b)` computed on the systolic line.
pub fn run_h_example(a: &BitVec, b: &BitVec) -> Result<BitVec, SystolicError> {
    if a.len() != b.len() {
        return Err(SystolicError::LengthMismatch { a: a.len(), b: b.len() });
    }
    let mut out = h_line(&[a.clone(), b.clone()])?;
    Ok(out.pop().map(|o| o.value).unwrap_or_else(|| BitVec::zeros(a.len())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_vector() {
        let a = BitVec::parse("10110").unwrap();
        let b = BitVec::parse("10101").unwrap();
        assert_eq!(run_h_example(&a, &b).unwrap(), BitVec::parse("00011").unwrap());
    }

    #[test]
    fn leading_bits_differ_returns_b() {
        let a = BitVec::parse("0111").unwrap();
        let b = BitVec::parse("1010").unwrap();
        assert_eq!(run_h_example(&a, &b).unwrap(), b);
    }

    #[test]
    fn outputs_are_staggered() {
        let a = BitVec::parse("110").unwrap();
        let b = BitVec::parse("011").unwrap();
        let out = h_line(&[a, b]).unwrap();
        assert_eq!(out[0].emitted_at, vec![2, 3, 4]);
    }

    #[test]
    fn streams_consecutive_pairs() {
        let xs: Vec<BitVec> = ["100", "110", "011"].iter().map(|s| BitVec::parse(s).unwrap()).collect();
        let out = h_line(&xs).unwrap();
        assert_eq!(out[0].value, BitVec::parse("010").unwrap());
        assert_eq!(out[1].value, BitVec::parse("011").unwrap());
    }
}
