//! Activity-ordered variable heap.

/// Binary max-heap over variable indices ordered by activity, ties broken
/// by the lower index.
#[derive(Debug, Clone)]
pub(crate) struct VarOrder {
    pub(crate) activity: Vec<f64>,
    heap: Vec<u32>,
    // position in `heap`, -1 when absent
    index: Vec<i32>,
    inc: f64,
}

impl VarOrder {
    #[cfg(test)]
    pub(crate) fn new(n: usize) -> Self {
        let mut order = VarOrder {
            activity: vec![0.0; n],
            heap: Vec::with_capacity(n),
            index: vec![-1; n],
            inc: 1.0,
        };
        for v in 0..n as u32 {
            order.insert(v);
        }
        order
    }

    pub(crate) fn with_activities(activity: Vec<f64>) -> Self {
        let n = activity.len();
        let mut order = VarOrder {
            activity,
            heap: Vec::with_capacity(n),
            index: vec![-1; n],
            inc: 1.0,
        };
        for v in 0..n as u32 {
            order.insert(v);
        }
        order
    }

    #[inline]
    fn better(&self, a: u32, b: u32) -> bool {
        let (x, y) = (self.activity[a as usize], self.activity[b as usize]);
        x > y || (x == y && a < b)
    }

    pub(crate) fn contains(&self, v: u32) -> bool {
        self.index[v as usize] >= 0
    }

    pub(crate) fn insert(&mut self, v: u32) {
        if self.contains(v) {
            return;
        }
        self.index[v as usize] = self.heap.len() as i32;
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1);
    }

    pub(crate) fn peek(&self) -> Option<u32> {
        self.heap.first().copied()
    }

    pub(crate) fn pop(&mut self) -> Option<u32> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("non-empty");
        self.index[top as usize] = -1;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.index[last as usize] = 0;
            self.sift_down(0);
        }
        Some(top)
    }

    pub(crate) fn bump(&mut self, v: u32) {
        let a = &mut self.activity[v as usize];
        *a += self.inc;
        if *a > 1e100 {
            for x in &mut self.activity {
                *x *= 1e-100;
            }
            self.inc *= 1e-100;
        }
        if self.contains(v) {
            self.sift_up(self.index[v as usize] as usize);
        }
    }

    pub(crate) fn decay(&mut self, factor: f64) {
        self.inc /= factor;
    }

    fn sift_up(&mut self, mut i: usize) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.heap[parent];
            if !self.better(v, p) {
                break;
            }
            self.heap[i] = p;
            self.index[p as usize] = i as i32;
            i = parent;
        }
        self.heap[i] = v;
        self.index[v as usize] = i as i32;
    }

    fn sift_down(&mut self, mut i: usize) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let left = 2 * i + 1;
            if left >= n {
                break;
            }
            let right = left + 1;
            let child = if right < n && self.better(self.heap[right], self.heap[left]) {
                right
            } else {
                left
            };
            if !self.better(self.heap[child], v) {
                break;
            }
            let c = self.heap[child];
            self.heap[i] = c;
            self.index[c as usize] = i as i32;
            i = child;
        }
        self.heap[i] = v;
        self.index[v as usize] = i as i32;
    }
}
