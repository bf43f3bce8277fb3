import pandas as pd
import streamlit as st

from libs.dataformatter import format_series
from libs.errors import TrendPermError
from libs.processes import GENERATORS, ProcessSpec, simulate
from libs.session_manager import set_session_series

### INICIA INTERFACE ###
st.title('🎲 Simulate')
st.write('Draw a path from one of the data-generating processes.')
st.divider()

kind = st.selectbox('Process', list(GENERATORS))
cols = st.columns(3)
with cols[0]:
    n = st.number_input('n', min_value=2, max_value=1_000_000, value=500, step=100)
with cols[1]:
    seed = st.number_input('Seed', min_value=0, value=0, step=1, key='sim_seed')
with cols[2]:
    h = st.number_input('Drift h', value=0.0, step=0.5, help='adds h·i/n^(3/2)')

# PARAMETERS PER PROCESS
params = {}
with st.container(border=True):
    if kind == 'mdep_product':
        params['m'] = st.number_input('m (dependence range)', min_value=0, value=1)
    if kind in ('ar1', 'ar2_interleaved'):
        params['rho'] = st.slider('ρ', min_value=-0.95, max_value=0.95, value=0.6, step=0.05)
    if kind == 'ma2':
        params['phi0'] = st.number_input('φ0', value=1.0)
        params['phi1'] = st.number_input('φ1', value=1.0)
    if kind in ('iid', 'ar1', 'ma2'):
        params['dist'] = st.selectbox('Innovations', ['gaussian', 'uniform', 'student_t'])
        if params['dist'] == 'student_t':
            params['df'] = st.number_input('Degrees of freedom', min_value=2.1, value=5.0)
    if kind == 'markov_local':
        params['M'] = st.number_input('Chain half-width M', min_value=1, value=5)
        params['epsilon'] = st.number_input('ε (reset probability)', min_value=0.001, max_value=0.999, value=0.1)
    if kind == 'drift_walk':
        params['c'] = st.number_input('c (jump size)', min_value=0.001, value=10.0)
        params['epsilon'] = st.number_input('ε (jump probability)', min_value=0.0, max_value=0.999, value=0.05)

if st.button('Simulate', type='primary', use_container_width=True):
    try:
        spec = ProcessSpec(kind, int(n), seed=int(seed), params=params, drift=float(h))
        series = simulate(spec)
        label = f"{kind} {spec.label()} n={spec.n} seed={spec.seed}"
        set_session_series(series, label)
        st.success(f'Simulated {label}. It is now the series used in 📈 Trend test.')
        values = pd.Series(series.values)
        st.dataframe(values.describe().to_frame('value').T, hide_index=True, use_container_width=True)
        st.download_button('Download series', format_series(series), file_name=f'{kind}_n{spec.n}_s{spec.seed}.txt')
    except TrendPermError as e:
        st.error(f'Simulation failed: {e}')
