//! Finite-difference checks of every differentiable operation and of the
//! full encoder and decoder losses.

use crate::autodiff::{grad_check, grad_check_params, AttentionSummarizer, GradCheckReport, Linear, LstmCell, ParamStore, SummaryState, Tape, TreeCell, Var, DEFAULT_DENOM_FLOOR};
use crate::complex::Graph;
use crate::decoder::{Decoder, DecoderHyperparams, TraversalMode};
use crate::encoder::{Encoder, EncoderConfig, EncoderInputs};
use crate::error::Result;
use crate::lifting::{clique_lift, LiftConfig};
use crate::linalg::Mat;
use crate::rng::{self, Rng};
use rand::Rng as _;

/// Central-difference step. Smaller steps let rounding dominate on the
/// long encoder and decoder chains.
pub const STEP: f64 = 1e-4;
pub const TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteEntry {
    pub name: &'static str,
    pub report: GradCheckReport,
}

impl SuiteEntry {
    pub fn passed(&self, tol: f64) -> bool {
        self.report.max_rel_error < tol
    }
}

/// Entries in (-1.5, 1.5) kept at least 0.05 away from zero, so kinked
/// activations are not probed at their kink.
fn rand_mat(r: &mut Rng, rows: usize, cols: usize) -> Mat {
    Mat::from_vec(
        rows,
        cols,
        (0..rows * cols)
            .map(|_| {
                let v: f64 = r.gen_range(0.05..1.5);
                if r.gen_bool(0.5) { v } else { -v }
            })
            .collect(),
    )
}

/// Weighted sum with fixed random weights, so every output coordinate
/// matters to the scalar.
fn probe(t: &mut Tape, v: Var, seed: u64) -> Result<Var> {
    let (rows, cols) = t.shape(v);
    let mut r = rng::stream(seed, "probe");
    let w = t.constant(rand_mat(&mut r, rows, cols));
    let p = t.mul(v, w)?;
    Ok(t.sum(p))
}

type OpCase = (&'static str, Vec<Mat>, Box<dyn Fn(&mut Tape, &[Var]) -> Result<Var>>);

fn op_cases(r: &mut Rng) -> Vec<OpCase> {
    let mask = Mat::from_vec(3, 4, vec![1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
    let target = Mat::from_vec(3, 4, (0..12).map(|i| f64::from(u8::from(i % 3 == 0))).collect());
    let m34 = |r: &mut Rng| rand_mat(r, 3, 4);
    vec![
        ("matmul", vec![m34(r), rand_mat(r, 4, 2)], Box::new(|t: &mut Tape, v: &[Var]| {
            let y = t.matmul(v[0], v[1])?;
            probe(t, y, 1)
        })),
        ("add", vec![m34(r), m34(r)], Box::new(|t: &mut Tape, v: &[Var]| {
            let y = t.add(v[0], v[1])?;
            probe(t, y, 2)
        })),
        ("sub", vec![m34(r), m34(r)], Box::new(|t: &mut Tape, v: &[Var]| {
            let y = t.sub(v[0], v[1])?;
            probe(t, y, 3)
        })),
        ("mul", vec![m34(r), m34(r)], Box::new(|t: &mut Tape, v: &[Var]| {
            let y = t.mul(v[0], v[1])?;
            probe(t, y, 4)
        })),
        ("add_row", vec![m34(r), rand_mat(r, 1, 4)], Box::new(|t: &mut Tape, v: &[Var]| {
            let y = t.add_row(v[0], v[1])?;
            probe(t, y, 5)
        })),
        ("scale", vec![m34(r)], Box::new(|t: &mut Tape, v: &[Var]| {
            let y = t.scale(v[0], -1.7);
            probe(t, y, 6)
        })),
        ("add_scalar", vec![m34(r)], Box::new(|t: &mut Tape, v: &[Var]| {
            let y = t.add_scalar(v[0], 0.3);
            let y = t.mul(y, y)?;
            probe(t, y, 7)
        })),
        ("concat_cols", vec![m34(r), rand_mat(r, 3, 2)], Box::new(|t: &mut Tape, v: &[Var]| {
            let y = t.concat_cols(&[v[0], v[1]])?;
            probe(t, y, 8)
        })),
        ("concat_rows", vec![m34(r), rand_mat(r, 2, 4)], Box::new(|t: &mut Tape, v: &[Var]| {
            let y = t.concat_rows(&[v[0], v[1]])?;
            probe(t, y, 9)
        })),
        ("slice_cols", vec![m34(r)], Box::new(|t: &mut Tape, v: &[Var]| {
            let y = t.slice_cols(v[0], 1, 2)?;
            probe(t, y, 10)
        })),
        ("slice_rows", vec![m34(r)], Box::new(|t: &mut Tape, v: &[Var]| {
            let y = t.slice_rows(v[0], 1, 2)?;
            probe(t, y, 11)
        })),
        ("transpose", vec![m34(r)], Box::new(|t: &mut Tape, v: &[Var]| {
            let y = t.transpose(v[0]);
            probe(t, y, 12)
        })),
        ("leaky_relu", vec![m34(r)], Box::new(|t: &mut Tape, v: &[Var]| {
            let y = t.leaky_relu(v[0], 0.01);
            probe(t, y, 13)
        })),
        ("sigmoid", vec![m34(r)], Box::new(|t: &mut Tape, v: &[Var]| {
            let y = t.sigmoid(v[0]);
            probe(t, y, 14)
        })),
        ("tanh", vec![m34(r)], Box::new(|t: &mut Tape, v: &[Var]| {
            let y = t.tanh(v[0]);
            probe(t, y, 15)
        })),
        ("masked_row_softmax", vec![m34(r)], Box::new(move |t: &mut Tape, v: &[Var]| {
            let y = t.masked_row_softmax(v[0], &mask)?;
            probe(t, y, 16)
        })),
        ("outer_add", vec![rand_mat(r, 3, 1), rand_mat(r, 4, 1)], Box::new(|t: &mut Tape, v: &[Var]| {
            let y = t.outer_add(v[0], v[1])?;
            let y = t.tanh(y);
            probe(t, y, 17)
        })),
        ("sum", vec![m34(r)], Box::new(|t: &mut Tape, v: &[Var]| {
            let y = t.mul(v[0], v[0])?;
            Ok(t.sum(y))
        })),
        ("mean", vec![m34(r)], Box::new(|t: &mut Tape, v: &[Var]| {
            let y = t.tanh(v[0]);
            Ok(t.mean(y))
        })),
        ("bce", vec![m34(r)], Box::new(move |t: &mut Tape, v: &[Var]| {
            let p = t.sigmoid(v[0]);
            t.bce(p, &target)
        })),
        ("pairwise_cosine", vec![m34(r), rand_mat(r, 2, 4)], Box::new(|t: &mut Tape, v: &[Var]| {
            let y = t.pairwise_cosine(v[0], v[1])?;
            probe(t, y, 18)
        })),
    ]
}

fn cell_cases(h: f64, floor: f64) -> Result<Vec<SuiteEntry>> {
    let mut out = Vec::new();
    let mut r = rng::stream(7, "cells");
    let x = rand_mat(&mut r, 1, 3);
    let hc = rand_mat(&mut r, 1, 4);
    let cc = rand_mat(&mut r, 1, 4);

    let mut s = ParamStore::new();
    let lin = Linear::new(&mut s, "lin", 3, 4, &mut r);
    let xc = x.clone();
    let report = grad_check_params(
        |t, s| {
            let xv = t.constant(xc.clone());
            let y = lin.forward(t, s, xv)?;
            probe(t, y, 20)
        },
        &mut s,
        h,
        floor,
    )?;
    out.push(SuiteEntry { name: "linear", report });

    let mut s = ParamStore::new();
    let lstm = LstmCell::new(&mut s, "lstm", 3, 4, &mut r);
    let (xc, h0, c0) = (x.clone(), hc.clone(), cc.clone());
    let report = grad_check_params(
        |t, s| {
            let (xv, hv, cv) = (t.constant(xc.clone()), t.constant(h0.clone()), t.constant(c0.clone()));
            let (h1, c1) = lstm.forward(t, s, xv, hv, cv)?;
            let y = t.concat_cols(&[h1, c1])?;
            probe(t, y, 21)
        },
        &mut s,
        h,
        floor,
    )?;
    out.push(SuiteEntry { name: "lstm_cell", report });

    let mut s = ParamStore::new();
    let tree = TreeCell::new(&mut s, "tree", 4, &mut r);
    let (hl, cl, hr, cr) = (hc.clone(), cc.clone(), rand_mat(&mut r, 1, 4), rand_mat(&mut r, 1, 4));
    let report = grad_check_params(
        |t, s| {
            let l = (t.constant(hl.clone()), t.constant(cl.clone()));
            let rr = (t.constant(hr.clone()), t.constant(cr.clone()));
            let (h1, c1) = tree.forward(t, s, l, rr)?;
            let y = t.concat_cols(&[h1, c1])?;
            probe(t, y, 22)
        },
        &mut s,
        h,
        floor,
    )?;
    out.push(SuiteEntry { name: "tree_cell", report });

    let mut s = ParamStore::new();
    let att = AttentionSummarizer::new(&mut s, "att", 4, &mut r);
    let seq: Vec<Mat> = (0..3).map(|_| rand_mat(&mut r, 1, 4)).collect();
    let report = grad_check_params(
        |t, s| {
            let mut state = SummaryState::default();
            let mut last = None;
            for m in &seq {
                let v = t.constant(m.clone());
                last = Some(att.push(t, s, &mut state, v)?);
            }
            probe(t, last.expect("three pushes"), 23)
        },
        &mut s,
        h,
        floor,
    )?;
    out.push(SuiteEntry { name: "attention_summarizer", report });
    Ok(out)
}

/// Run every check with step `h` and relative-error floor `floor`.
pub fn run_suite(h: f64, floor: f64) -> Result<Vec<SuiteEntry>> {
    let mut out = Vec::new();
    let mut r = rng::stream(3, "gradsuite");
    for (name, inputs, f) in op_cases(&mut r) {
        out.push(SuiteEntry {
            name,
            report: grad_check(f, &inputs, h, floor)?,
        });
    }
    out.extend(cell_cases(h, floor)?);

    // encoder, both levels, on a lifted 5-node complex with a triangle
    let g = Graph::new(5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (1, 3)])?;
    let cc = clique_lift(&g, &LiftConfig::default());
    let inputs = EncoderInputs::from_cc(&cc);
    let mut s = ParamStore::new();
    let enc = Encoder::new(&mut s, EncoderConfig { input_dim: 5, hidden: 6 }, &mut r);
    let report = grad_check_params(
        |t, s| {
            let c = enc.forward(t, s, &inputs)?;
            let a = probe(t, c.h0, 30)?;
            let b = probe(t, c.h1, 31)?;
            let d = probe(t, c.h2, 32)?;
            let ab = t.add(a, b)?;
            t.add(ab, d)
        },
        &mut s,
        h,
        floor,
    )?;
    out.push(SuiteEntry { name: "encoder", report });

    // teacher-forced decoder loss over 4 nodes
    let mut s = ParamStore::new();
    let dec = Decoder::new(&mut s, "dec", 6, &mut r);
    let h_enc = rand_mat(&mut r, 3, 6);
    let targets = vec![vec![0, 1], vec![], vec![1, 3]];
    let hp = DecoderHyperparams::for_rank(1, TraversalMode::Deterministic);
    let report = grad_check_params(
        |t, s| {
            let mut rr = rng::stream(0, "unused");
            let hv = t.constant(h_enc.clone());
            Ok(dec.teacher_forced_bce(t, s, hv, &targets, 4, &hp, &mut rr)?.expect("three rows"))
        },
        &mut s,
        h,
        floor,
    )?;
    out.push(SuiteEntry { name: "decoder_teacher_forced", report });
    let report = grad_check(
        |t, v| {
            let mut rr = rng::stream(0, "unused");
            Ok(dec.teacher_forced_bce(t, &s, v[0], &targets, 4, &hp, &mut rr)?.expect("three rows"))
        },
        std::slice::from_ref(&h_enc),
        h,
        floor,
    )?;
    out.push(SuiteEntry { name: "decoder_teacher_forced_input", report });
    Ok(out)
}

/// Suite with the default step and floor.
pub fn run_default() -> Result<Vec<SuiteEntry>> {
    run_suite(STEP, DEFAULT_DENOM_FLOOR)
}
